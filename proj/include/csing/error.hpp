#pragma once

#include <stdexcept>
#include <string>

namespace csing {

/// Base of every error thrown by the library. `kind()` is a stable,
/// machine-readable tag used by the CLI's error JSON.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
    [[nodiscard]] virtual const char* kind() const noexcept { return "error"; }
};

#define CSING_DEFINE_ERROR(Name, tag)                                          \
    class Name : public Error {                                                \
    public:                                                                    \
        using Error::Error;                                                    \
        [[nodiscard]] const char* kind() const noexcept override { return tag; } \
    }

/// Malformed cluster data: short chains, zero-length edges, bad junctions.
CSING_DEFINE_ERROR(StructuralError, "structural");
/// A chamber with non-positive area.
CSING_DEFINE_ERROR(DegenerateChamberError, "degenerate_chamber");
/// Interface collapse or crossing during optimization.
CSING_DEFINE_ERROR(TopologyError, "topology");
/// Base point not on the cluster boundary.
CSING_DEFINE_ERROR(DomainError, "domain");
/// Requested radius below what the discretization resolves.
CSING_DEFINE_ERROR(ResolutionError, "resolution");
/// Argument outside its documented range.
CSING_DEFINE_ERROR(ParameterError, "parameter");

#undef CSING_DEFINE_ERROR

} // namespace csing
