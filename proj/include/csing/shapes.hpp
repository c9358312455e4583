#pragma once

// Hand-built clusters: starting guesses for the optimizer and exact
// fixtures (straight lines, Y junctions) for the analysis code.

#include <cmath>
#include <numeric>
#include <span>
#include <vector>

#include "csing/geometry.hpp"

namespace csing::shapes {

namespace detail {

/// Points strictly after `a` up to and including `b`, spaced at most `h`.
inline void append_segment(std::vector<Vec2>& out, Vec2 a, Vec2 b, double h) {
    auto n = static_cast<std::size_t>(std::max(1.0, std::ceil(distance(a, b) / h)));
    for (std::size_t k = 1; k <= n; ++k) out.push_back(a + (static_cast<double>(k) / static_cast<double>(n)) * (b - a));
}

/// Arc of radius r around c from angle t0 to t1, endpoints included.
inline std::vector<Vec2> arc(Vec2 c, double r, double t0, double t1, double h) {
    auto n = static_cast<std::size_t>(std::max(2.0, std::ceil(std::abs(t1 - t0) * r / h)));
    std::vector<Vec2> pts;
    pts.reserve(n + 1);
    for (std::size_t k = 0; k <= n; ++k) {
        double t = t0 + (t1 - t0) * static_cast<double>(k) / static_cast<double>(n);
        pts.push_back(c + Vec2{r * std::cos(t), r * std::sin(t)});
    }
    return pts;
}

} // namespace detail

/// Regular n-gon inscribed in the circle of radius r: one chamber, one loop.
inline Cluster polygon_disk(Vec2 center, double radius, std::size_t n, double lambda = 0.0) {
    Chain chain{{}, true};
    chain.vertices.reserve(n);
    for (std::size_t k = 0; k < n; ++k) {
        double t = 2.0 * kPi * static_cast<double>(k) / static_cast<double>(n);
        chain.vertices.push_back(center + Vec2{radius * std::cos(t), radius * std::sin(t)});
    }
    return Cluster({{1}}, {{std::move(chain), 1, 0}}, lambda);
}

/// Axis-aligned square of the given side, lower-left corner at `origin`,
/// edges subdivided to spacing at most h.
inline Cluster square(Vec2 origin, double side, double h) {
    Chain chain{{origin}, true};
    Vec2 corners[] = {origin + Vec2{side, 0}, origin + Vec2{side, side}, origin + Vec2{0, side}, origin};
    Vec2 prev = origin;
    for (Vec2 c : corners) {
        detail::append_segment(chain.vertices, prev, c, h);
        prev = c;
    }
    chain.vertices.pop_back();
    return Cluster({{1}}, {{std::move(chain), 1, 0}});
}

/// N rectangles of common height side by side, widths chosen so that the
/// chamber areas equal `areas` exactly. Chamber i has label i + 1.
inline Cluster adjacent_rectangles(std::span<const double> areas, double height, double h) {
    const std::size_t n = areas.size();
    if (n == 0) throw ParameterError("adjacent_rectangles needs at least one area");
    std::vector<double> xs{0.0};
    for (double a : areas) {
        if (!(a > 0.0)) throw ParameterError("areas must be positive");
        xs.push_back(xs.back() + a / height);
    }
    std::vector<Chamber> chambers;
    for (std::size_t i = 0; i < n; ++i) chambers.push_back({static_cast<int>(i + 1)});
    if (n == 1) {
        Chain loop{{Vec2{0, 0}}, true};
        Vec2 corners[] = {{xs[1], 0}, {xs[1], height}, {0, height}, {0, 0}};
        Vec2 prev{0, 0};
        for (Vec2 c : corners) {
            detail::append_segment(loop.vertices, prev, c, h);
            prev = c;
        }
        loop.vertices.pop_back();
        return Cluster(chambers, {{std::move(loop), 1, 0}});
    }
    auto polyline = [&](std::initializer_list<Vec2> pts) {
        Chain c{{*pts.begin()}, false};
        Vec2 prev = *pts.begin();
        for (auto it = pts.begin() + 1; it != pts.end(); ++it) {
            detail::append_segment(c.vertices, prev, *it, h);
            prev = *it;
        }
        return c;
    };
    std::vector<Interface> interfaces;
    for (std::size_t k = 1; k < n; ++k) {
        int left = static_cast<int>(k), right = static_cast<int>(k + 1);
        interfaces.push_back({polyline({{xs[k], 0}, {xs[k], height}}), left, right});
    }
    interfaces.push_back({polyline({{xs[1], height}, {0, height}, {0, 0}, {xs[1], 0}}), 1, 0});
    for (std::size_t i = 1; i + 1 < n; ++i) {
        int label = static_cast<int>(i + 1);
        interfaces.push_back({polyline({{xs[i + 1], height}, {xs[i], height}}), label, 0});
        interfaces.push_back({polyline({{xs[i], 0}, {xs[i + 1], 0}}), label, 0});
    }
    interfaces.push_back({polyline({{xs[n - 1], 0}, {xs[n], 0}, {xs[n], height}, {xs[n - 1], height}}),
                          static_cast<int>(n), 0});
    return Cluster(std::move(chambers), std::move(interfaces));
}

/// Disk of radius r cut along the horizontal diameter: two half-disk
/// chambers (label 1 above, 2 below). The centre lies on a straight interface.
inline Cluster half_disks(double radius, double h) {
    Chain diameter{{{-radius, 0}}, false};
    detail::append_segment(diameter.vertices, {-radius, 0}, {radius, 0}, h);
    Chain upper{detail::arc({0, 0}, radius, 0.0, kPi, h), false};
    Chain lower{detail::arc({0, 0}, radius, kPi, 2.0 * kPi, h), false};
    lower.vertices.front() = {-radius, 0};
    lower.vertices.back() = {radius, 0};
    upper.vertices.front() = {radius, 0};
    upper.vertices.back() = {-radius, 0};
    return Cluster({{1}, {2}}, {{std::move(diameter), 1, 2}, {std::move(upper), 1, 0}, {std::move(lower), 2, 0}});
}

/// Disk of radius r split into three sectors by rays from the centre, with
/// opening angles proportional to `weights`. The centre is an exact Y-type
/// triple junction when the weights are equal.
inline Cluster three_sector_disk(double radius, std::span<const double> weights, double h, double start_angle = kPi / 2) {
    if (weights.size() != 3) throw ParameterError("three_sector_disk needs exactly three weights");
    double total = std::accumulate(weights.begin(), weights.end(), 0.0);
    double angles[4];
    angles[0] = start_angle;
    for (int i = 0; i < 3; ++i) angles[i + 1] = angles[i] + 2.0 * kPi * weights[static_cast<std::size_t>(i)] / total;
    auto tip = [&](double t) { return Vec2{radius * std::cos(t), radius * std::sin(t)}; };
    std::vector<Vec2> tips = {tip(angles[0]), tip(angles[1]), tip(angles[2])};

    std::vector<Interface> interfaces;
    // Ray k points outward; the sector after it (counterclockwise) is on its left.
    for (int k = 0; k < 3; ++k) {
        Chain ray{{{0, 0}}, false};
        detail::append_segment(ray.vertices, {0, 0}, tips[static_cast<std::size_t>(k)], h);
        int left = k + 1;
        int right = k == 0 ? 3 : k;
        interfaces.push_back({std::move(ray), left, right});
    }
    for (int i = 0; i < 3; ++i) {
        Chain outer{detail::arc({0, 0}, radius, angles[i], angles[i + 1], h), false};
        outer.vertices.front() = tips[static_cast<std::size_t>(i)];
        outer.vertices.back() = tips[static_cast<std::size_t>((i + 1) % 3)];
        interfaces.push_back({std::move(outer), i + 1, 0});
    }
    return Cluster({{1}, {2}, {3}}, std::move(interfaces));
}

/// Initial guess used by the experiment harness: a square for one chamber,
/// rectangles in a row for two, a split disk for three, rectangles beyond.
inline Cluster initial_guess(std::span<const double> areas, double h) {
    double total = std::accumulate(areas.begin(), areas.end(), 0.0);
    if (areas.size() == 1) return square({0, 0}, std::sqrt(areas[0]), h);
    if (areas.size() == 3) return three_sector_disk(std::sqrt(total / kPi), areas, h);
    return adjacent_rectangles(areas, std::sqrt(total / static_cast<double>(areas.size())), h);
}

} // namespace csing::shapes
