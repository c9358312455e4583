#pragma once

// JSON and CSV forms of clusters, reports, profiles, point sets and covering
// verdicts.

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "csing/covering.hpp"
#include "csing/geometry.hpp"
#include "csing/monotonicity.hpp"
#include "csing/optimizer.hpp"
#include "csing/stratify.hpp"

namespace csing::io {

using json = nlohmann::json;

inline json to_json(const Cluster& c) {
    json chambers = json::array();
    for (const auto& ch : c.chambers()) chambers.push_back({{"label", ch.label}});
    json interfaces = json::array();
    for (const auto& f : c.interfaces()) {
        json verts = json::array();
        for (auto p : f.chain.vertices) verts.push_back({p.x, p.y});
        interfaces.push_back({{"chambers", {f.left, f.right}}, {"closed", f.chain.closed}, {"vertices", std::move(verts)}});
    }
    json out = {{"chambers", std::move(chambers)}, {"interfaces", std::move(interfaces)}, {"lambda", c.lambda()}};
    out["r0"] = std::isfinite(c.r0()) ? json(c.r0()) : json(nullptr);
    return out;
}

/// Throws StructuralError for documents of the wrong shape and whatever the
/// Cluster constructor throws for invalid geometry.
inline Cluster cluster_from_json(const json& j) {
    try {
        std::vector<Chamber> chambers;
        for (const auto& c : j.at("chambers")) chambers.push_back({c.at("label").get<int>()});
        std::vector<Interface> interfaces;
        for (const auto& f : j.at("interfaces")) {
            const auto& pair = f.at("chambers");
            if (!pair.is_array() || pair.size() != 2) throw StructuralError("interface chambers must be a pair of labels");
            Chain chain{{}, f.value("closed", false)};
            for (const auto& v : f.at("vertices")) {
                if (!v.is_array() || v.size() != 2) throw StructuralError("vertices must be [x, y] pairs");
                chain.vertices.push_back({v[0].get<double>(), v[1].get<double>()});
            }
            interfaces.push_back({std::move(chain), pair[0].get<int>(), pair[1].get<int>()});
        }
        double lambda = j.contains("lambda") && !j["lambda"].is_null() ? j["lambda"].get<double>() : 0.0;
        double r0 = j.contains("r0") && !j["r0"].is_null() ? j["r0"].get<double>() : std::numeric_limits<double>::infinity();
        return Cluster(std::move(chambers), std::move(interfaces), lambda, r0);
    } catch (const json::exception& e) {
        throw StructuralError(std::string("malformed cluster document: ") + e.what());
    }
}

inline json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParameterError("cannot open " + path);
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ParameterError(path + ": " + e.what());
    }
}

inline void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw ParameterError("cannot write " + path);
    out << text;
}

inline Cluster read_cluster(const std::string& path) { return cluster_from_json(read_json_file(path)); }

inline json to_json(const covering::CountBound& b) {
    return b.saturated ? json("unbounded") : json(b.value);
}

inline json to_json(const AnnulusBudget& b) {
    return {{"value", b.budget},
            {"occupied_drops", b.occupied_drops},
            {"truncated", b.truncated},
            {"bound", b.bound},
            {"even_sum", b.even_sum},
            {"odd_sum", b.odd_sum},
            {"outer_value", b.outer_value}};
}

inline json to_json(const SingularPoint& p) {
    return {{"x", p.location.x},         {"y", p.location.y},     {"density", p.density},
            {"density_error", p.density_error}, {"reliable", p.reliable}, {"kind", to_string(p.kind)},
            {"degree", p.degree},        {"budget", to_json(p.budget)}};
}

inline json to_json(const SingularityReport& r) {
    json points = json::array();
    for (const auto& p : r.points) points.push_back(to_json(p));
    return {{"points", std::move(points)},
            {"count", r.count},
            {"certificate_bound", to_json(r.certificate_bound)},
            {"perimeter_ratio", r.perimeter_ratio},
            {"canonical_class", r.canonical_class},
            {"center", {r.center.x, r.center.y}},
            {"base_radius", r.base_radius},
            {"scale_ratio", r.scale_ratio},
            {"max_budget", r.max_budget},
            {"all_untruncated", r.all_untruncated}};
}

inline json to_json(const covering::CoveringVerdict& v) {
    json out = {{"verdict", v.kind == covering::VerdictKind::Witness ? "witness" : "within_budget"},
                {"bound", to_json(v.bound)},
                {"size", v.set_size},
                {"max_occupancy", v.max_occupancy},
                {"bound_holds", v.bound_holds}};
    if (v.witness_index) {
        out["witness_index"] = *v.witness_index;
        out["witness_occupancy"] = v.witness_occupancy;
    }
    return out;
}

inline std::string number(double v) {
    std::ostringstream s;
    s.precision(17);
    s << v;
    return s.str();
}

inline std::string profile_csv(const MonotonicityProfile& p) {
    std::string s = "r,M\n";
    for (std::size_t i = 0; i < p.radii.size(); ++i) s += number(p.radii[i]) + "," + number(p.values[i]) + "\n";
    return s;
}

inline std::string convergence_csv(const std::vector<ConvergenceRecord>& log) {
    std::string s = "iteration,energy,max_volume_error,grad_norm\n";
    for (const auto& r : log)
        s += std::to_string(r.iteration) + "," + number(r.energy) + "," + number(r.max_volume_error) + "," + number(r.grad_norm) + "\n";
    return s;
}

/// One point per row, coordinates separated by commas. Blank lines and a
/// non-numeric header row are skipped; all rows must have the same width.
inline covering::PointSet parse_points_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    std::vector<double> coords;
    std::size_t dim = 0;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        std::vector<double> row;
        std::istringstream cells(line);
        std::string cell;
        bool numeric = true;
        while (std::getline(cells, cell, ',')) {
            try {
                std::size_t used = 0;
                row.push_back(std::stod(cell, &used));
                if (cell.find_first_not_of(" \t", used) != std::string::npos) numeric = false;
            } catch (const std::exception&) {
                numeric = false;
            }
        }
        if (!numeric) {
            if (coords.empty() && dim == 0) continue;
            throw ParameterError("line " + std::to_string(lineno) + " is not numeric");
        }
        if (dim == 0) dim = row.size();
        if (row.size() != dim) throw ParameterError("line " + std::to_string(lineno) + " has the wrong number of coordinates");
        coords.insert(coords.end(), row.begin(), row.end());
    }
    if (dim == 0) throw ParameterError("point file is empty");
    return covering::PointSet(dim, std::move(coords));
}

inline std::string points_csv(std::size_t dimension, const std::vector<double>& coords) {
    std::string s;
    for (std::size_t i = 0; i < coords.size(); i += dimension) {
        for (std::size_t k = 0; k < dimension; ++k) s += (k ? "," : "") + number(coords[i + k]);
        s += "\n";
    }
    return s;
}

} // namespace csing::io
