#pragma once

#include <cmath>
#include <vector>

#include "csing/optimizer.hpp"
#include "csing/shapes.hpp"

namespace testsupport {

using csing::kPi;

/// Equal-area double bubble by direct construction: two circles of radius R
/// whose centres are R apart, cut by their common chord. The area of one
/// bubble is integrated numerically over vertical slices and R is found by
/// bisection, so the oracle does not rely on a closed-form area.
struct DoubleBubbleOracle {
    double radius = 0.0;
    double perimeter = 0.0;
};

inline double bubble_area_by_slices(double R) {
    // Right bubble: disk centred at (R/2, 0), cut at x = 0.
    const int n = 200000;
    const double x0 = 0.0, x1 = 1.5 * R;
    double area = 0.0;
    for (int k = 0; k < n; ++k) {
        double x = x0 + (x1 - x0) * (k + 0.5) / n;
        double dx = x - 0.5 * R;
        area += 2.0 * std::sqrt(std::max(0.0, R * R - dx * dx)) * (x1 - x0) / n;
    }
    return area;
}

inline DoubleBubbleOracle double_bubble_oracle(double area) {
    double lo = 0.1, hi = 10.0;
    for (int it = 0; it < 100; ++it) {
        double mid = 0.5 * (lo + hi);
        (bubble_area_by_slices(mid) < area ? lo : hi) = mid;
    }
    const double R = 0.5 * (lo + hi);
    // Each outer arc spans 240 degrees; the chord has length 2 R sin(60).
    return {R, 2.0 * (4.0 * kPi / 3.0) * R + 2.0 * R * std::sin(kPi / 3.0)};
}

inline const csing::OptimizerResult& double_bubble() {
    static const csing::OptimizerResult r = [] {
        std::vector<double> areas{kPi, kPi};
        csing::OptimizerConfig cfg;
        cfg.target_volumes = areas;
        return csing::minimize(csing::shapes::adjacent_rectangles(areas, std::sqrt(kPi), 0.05), cfg);
    }();
    return r;
}

inline const csing::OptimizerResult& triple_bubble() {
    static const csing::OptimizerResult r = [] {
        std::vector<double> areas{kPi, kPi, kPi};
        csing::OptimizerConfig cfg;
        cfg.target_volumes = areas;
        return csing::minimize(csing::shapes::initial_guess(areas, 0.05), cfg);
    }();
    return r;
}

/// The optimizer output with its almost-minimality constant set to the curvature bound.
inline csing::Cluster with_curvature_lambda(const csing::OptimizerResult& r) {
    return csing::Cluster(r.cluster.chambers(), r.cluster.interfaces(), csing::curvature_bound(r));
}

inline csing::Cluster with_lambda(const csing::Cluster& c, double lambda) {
    return csing::Cluster(c.chambers(), c.interfaces(), lambda, c.r0());
}

} // namespace testsupport
