#pragma once

// Monotonicity quantity M(x, r) = e^{lambda r} P(E; B_r(x)) / r in the plane,
// point densities, the quantitative drop test and per-point annulus budgets.

#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "csing/geometry.hpp"

namespace csing {

/// Length of the unit 1-ball; densities are lim M / kOmega1.
inline constexpr double kOmega1 = 2.0;
/// Base points farther than this from every chain are rejected.
inline constexpr double kSnapTolerance = 1e-6;

struct MonotonicityProfile {
    Vec2 base_point;
    std::vector<double> radii;
    std::vector<double> values;
    double lambda = 0.0;
};

/// Projects x onto the boundary; throws DomainError when it is not within
/// kSnapTolerance of any chain.
inline Vec2 snap_to_boundary(const Cluster& cluster, Vec2 x) {
    auto proj = project_to_boundary(cluster, x);
    if (!(proj.distance <= kSnapTolerance))
        throw DomainError("base point is " + std::to_string(proj.distance) + " away from the cluster boundary");
    return proj.point;
}

/// Smallest radius at which M is evaluated. Localized perimeter is exact on
/// the polygon at every radius, so the only limit is floating-point
/// resolution relative to the size of the cluster.
inline double resolution_floor(const Cluster& cluster) {
    return 1e-8 * std::max(1.0, bounding_diameter(cluster.interfaces()));
}

/// M at one radius, without snapping.
inline double monotonicity_value(const Cluster& cluster, Vec2 x, double r) {
    return std::exp(cluster.lambda() * r) * localized_perimeter(cluster, Ball(x, r)) / r;
}

/// `per_decade` log-spaced radii from r_min to r_max inclusive.
inline std::vector<double> log_radii(double r_min, double r_max, int per_decade) {
    if (!(r_min > 0.0) || !(r_max > r_min) || per_decade < 1) throw ParameterError("log_radii needs 0 < r_min < r_max");
    const double decades = std::log10(r_max / r_min);
    const auto n = static_cast<std::size_t>(std::ceil(decades * per_decade));
    std::vector<double> out;
    for (std::size_t k = 0; k <= n; ++k) out.push_back(r_min * std::pow(r_max / r_min, static_cast<double>(k) / static_cast<double>(n)));
    out.back() = r_max;
    return out;
}

inline MonotonicityProfile profile(const Cluster& cluster, Vec2 x, std::span<const double> radii) {
    if (radii.empty()) throw ParameterError("profile needs at least one radius");
    for (std::size_t i = 0; i < radii.size(); ++i) {
        if (!(radii[i] > 0.0)) throw ParameterError("radii must be positive");
        if (i > 0 && !(radii[i] > radii[i - 1])) throw ParameterError("radii must be strictly increasing");
    }
    if (radii.back() > cluster.r0()) throw ParameterError("radii must not exceed r0");
    MonotonicityProfile p;
    p.base_point = snap_to_boundary(cluster, x);
    p.lambda = cluster.lambda();
    p.radii.assign(radii.begin(), radii.end());
    p.values.reserve(radii.size());
    for (double r : radii) p.values.push_back(monotonicity_value(cluster, p.base_point, r));
    return p;
}

/// Largest decrease values[i] - values[j] over i < j; 0 for a nondecreasing profile.
inline double max_decrease(const MonotonicityProfile& p) {
    double running_max = -std::numeric_limits<double>::infinity();
    double worst = 0.0;
    for (double v : p.values) {
        worst = std::max(worst, running_max - v);
        running_max = std::max(running_max, v);
    }
    return worst;
}

struct DensityEstimate {
    double density = 0.0;
    /// Disagreement between the three-point fit and the two-point
    /// extrapolation, in density units.
    double error = 0.0;
    double max_decrease = 0.0;
    bool reliable = true;
};

/// Extrapolates M to r = 0 with a least-squares line through the three
/// smallest radii and divides by kOmega1. The estimate is flagged unreliable
/// when the profile decreases by more than `monotone_tolerance` anywhere or
/// the extrapolation error exceeds `error_tolerance`.
inline DensityEstimate density(const MonotonicityProfile& p, double monotone_tolerance = 1e-3,
                               double error_tolerance = 0.02) {
    if (p.radii.size() < 3) throw ParameterError("density needs at least three radii");
    if (p.radii.back() < 10.0 * (1.0 - 1e-9) * p.radii.front()) throw ParameterError("density radii must span a decade");
    double sr = 0, sm = 0, srr = 0, srm = 0;
    for (int i = 0; i < 3; ++i) {
        sr += p.radii[i];
        sm += p.values[i];
        srr += p.radii[i] * p.radii[i];
        srm += p.radii[i] * p.values[i];
    }
    double slope = (3 * srm - sr * sm) / (3 * srr - sr * sr);
    double intercept = (sm - slope * sr) / 3.0;
    double two_point = p.values[0] - p.radii[0] * (p.values[1] - p.values[0]) / (p.radii[1] - p.radii[0]);

    DensityEstimate est;
    est.density = intercept / kOmega1;
    est.error = std::abs(intercept - two_point) / kOmega1;
    est.max_decrease = max_decrease(p);
    est.reliable = est.max_decrease <= monotone_tolerance && est.error <= error_tolerance;
    return est;
}

/// True when M(x, r) - M(x, 4 lambda^2 r) exceeds the threshold.
inline bool detect_drop(const Cluster& cluster, Vec2 x, double r, double scale_ratio, double drop_threshold) {
    if (!(scale_ratio > 0.0 && scale_ratio <= 0.125)) throw ParameterError("scale_ratio must lie in (0, 1/8]");
    if (!(drop_threshold > 0.0)) throw ParameterError("drop_threshold must be positive");
    if (!(r > 0.0) || r > cluster.r0()) throw ParameterError("radius must lie in (0, r0]");
    const double inner = 4.0 * scale_ratio * scale_ratio * r;
    if (inner < resolution_floor(cluster)) throw ResolutionError("inner radius below the resolution floor");
    Vec2 p = snap_to_boundary(cluster, x);
    return monotonicity_value(cluster, p, r) - monotonicity_value(cluster, p, inner) > drop_threshold;
}

struct AnnulusBudget {
    Vec2 base_point;
    double scale_ratio = 0.125;
    double base_radius = 0.0;
    double drop_threshold = 1e-3;
    /// Scale indices n whose drop between 2R(2 lambda)^n and 2R(2 lambda)^{n+2} exceeds the threshold.
    std::vector<int> occupied_drops;
    /// N_x.
    int budget = 0;
    /// Measured drop at every evaluated scale index.
    std::vector<double> drops;
    /// Resolution floor reached before max_depth.
    bool truncated = false;
    /// ceil(2 e^Lambda P(B_2R(x)) / (delta R)).
    std::int64_t bound = 0;
    /// Sums of the measured drops over even and odd n; both telescope below M(x, 2R).
    double even_sum = 0.0;
    double odd_sum = 0.0;
    double outer_value = 0.0;
};

inline AnnulusBudget annulus_budget(const Cluster& cluster, Vec2 x, double R, double scale_ratio, double drop_threshold,
                                    int max_depth) {
    if (!(R > 0.0)) throw ParameterError("R must be positive");
    if (!(scale_ratio > 0.0 && scale_ratio <= 0.125)) throw ParameterError("scale_ratio must lie in (0, 1/8]");
    if (!(drop_threshold > 0.0)) throw ParameterError("drop_threshold must be positive");
    if (max_depth < 0) throw ParameterError("max_depth must be non-negative");
    if (2.0 * R > cluster.r0()) throw ParameterError("2R must not exceed r0");

    AnnulusBudget b;
    b.base_point = snap_to_boundary(cluster, x);
    b.scale_ratio = scale_ratio;
    b.base_radius = R;
    b.drop_threshold = drop_threshold;
    const double floor = resolution_floor(cluster);
    const double q = 2.0 * scale_ratio;
    for (int n = 0; n <= max_depth; ++n) {
        double r_hi = 2.0 * R * std::pow(q, n);
        double r_lo = 2.0 * R * std::pow(q, n + 2);
        if (r_lo < floor) {
            b.truncated = true;
            break;
        }
        double drop = monotonicity_value(cluster, b.base_point, r_hi) - monotonicity_value(cluster, b.base_point, r_lo);
        b.drops.push_back(drop);
        (n % 2 == 0 ? b.even_sum : b.odd_sum) += drop;
        if (drop > drop_threshold) b.occupied_drops.push_back(n);
    }
    b.budget = static_cast<int>(b.occupied_drops.size());
    b.outer_value = monotonicity_value(cluster, b.base_point, 2.0 * R);
    const double p2r = localized_perimeter(cluster, Ball(b.base_point, 2.0 * R));
    b.bound = static_cast<std::int64_t>(std::ceil(2.0 * std::exp(cluster.lambda()) * p2r / (drop_threshold * R)));
    return b;
}

} // namespace csing
