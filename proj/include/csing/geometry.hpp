#pragma once

// Planar clusters: chambers bounded by polygonal interface chains.
//
// Each interface chain is oriented; `left` is the chamber on the left of the
// traversal direction and `right` the one on the right. Label 0 is the
// exterior. Open chains end at junction vertices, where exactly three chain
// endpoints coincide. Closed chains are loops without junctions; their last
// vertex connects back to the first, which is not repeated.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "csing/error.hpp"

namespace csing {

inline constexpr double kPi = 3.14159265358979323846;

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    constexpr Vec2& operator+=(Vec2 o) { x += o.x; y += o.y; return *this; }
    constexpr Vec2& operator-=(Vec2 o) { x -= o.x; y -= o.y; return *this; }
    constexpr Vec2& operator*=(double s) { x *= s; y *= s; return *this; }
    friend constexpr Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
    friend constexpr Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
    friend constexpr Vec2 operator-(Vec2 a) { return {-a.x, -a.y}; }
    friend constexpr Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
    friend constexpr Vec2 operator*(Vec2 a, double s) { return {s * a.x, s * a.y}; }
    friend constexpr Vec2 operator/(Vec2 a, double s) { return {a.x / s, a.y / s}; }
    friend constexpr bool operator==(Vec2 a, Vec2 b) = default;
};

constexpr double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
constexpr double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
/// Counterclockwise quarter turn.
constexpr Vec2 perp(Vec2 a) { return {-a.y, a.x}; }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }
inline double distance(Vec2 a, Vec2 b) { return norm(a - b); }

struct Chain {
    std::vector<Vec2> vertices;
    bool closed = false;

    [[nodiscard]] std::size_t edge_count() const {
        if (vertices.size() < 2) return 0;
        return closed ? vertices.size() : vertices.size() - 1;
    }
    [[nodiscard]] std::pair<Vec2, Vec2> edge(std::size_t i) const {
        return {vertices[i], vertices[(i + 1) % vertices.size()]};
    }
    [[nodiscard]] double length() const {
        double total = 0.0;
        for (std::size_t i = 0; i < edge_count(); ++i) {
            auto [a, b] = edge(i);
            total += distance(a, b);
        }
        return total;
    }
    /// Line integral of (x dy - y dx)/2 along the chain.
    [[nodiscard]] double signed_area_contribution() const {
        double total = 0.0;
        for (std::size_t i = 0; i < edge_count(); ++i) {
            auto [a, b] = edge(i);
            total += cross(a, b);
        }
        return 0.5 * total;
    }
};

struct Interface {
    Chain chain;
    int left = 0;
    int right = 0;

    /// Unordered chamber pair as (min, max).
    [[nodiscard]] std::pair<int, int> pair() const {
        return {std::min(left, right), std::max(left, right)};
    }
};

struct Chamber {
    int label = 1;
};

struct Ball {
    Vec2 center;
    double radius;

    Ball(Vec2 c, double r) : center(c), radius(r) {
        if (!(r > 0.0) || !std::isfinite(r)) throw ParameterError("ball radius must be positive and finite");
    }
};

namespace detail {

inline double orient(Vec2 a, Vec2 b, Vec2 c) { return cross(b - a, c - a); }

inline bool on_segment(Vec2 a, Vec2 b, Vec2 p) {
    return std::min(a.x, b.x) <= p.x && p.x <= std::max(a.x, b.x) && std::min(a.y, b.y) <= p.y &&
           p.y <= std::max(a.y, b.y);
}

/// Closed-segment intersection test.
inline bool segments_intersect(Vec2 p1, Vec2 p2, Vec2 q1, Vec2 q2) {
    double d1 = orient(q1, q2, p1);
    double d2 = orient(q1, q2, p2);
    double d3 = orient(p1, p2, q1);
    double d4 = orient(p1, p2, q2);
    if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0))) return true;
    if (d1 == 0 && on_segment(q1, q2, p1)) return true;
    if (d2 == 0 && on_segment(q1, q2, p2)) return true;
    if (d3 == 0 && on_segment(p1, p2, q1)) return true;
    if (d4 == 0 && on_segment(p1, p2, q2)) return true;
    return false;
}

struct SegmentRef {
    std::size_t chain;
    std::size_t edge;
};

} // namespace detail

/// Axis-aligned bounding box diagonal of all chain vertices.
inline double bounding_diameter(std::span<const Interface> interfaces) {
    double lo_x = std::numeric_limits<double>::infinity(), lo_y = lo_x;
    double hi_x = -lo_x, hi_y = -lo_x;
    for (const auto& f : interfaces) {
        for (auto v : f.chain.vertices) {
            lo_x = std::min(lo_x, v.x);
            lo_y = std::min(lo_y, v.y);
            hi_x = std::max(hi_x, v.x);
            hi_y = std::max(hi_y, v.y);
        }
    }
    if (hi_x < lo_x) return 0.0;
    return std::hypot(hi_x - lo_x, hi_y - lo_y);
}

/// Tolerance under which two chain endpoints are the same junction.
inline double junction_tolerance(std::span<const Interface> interfaces) {
    return 1e-9 * std::max(1.0, bounding_diameter(interfaces));
}

/// A group of coincident open-chain endpoints. `ends` holds
/// (interface index, 0 for the first vertex / 1 for the last).
struct EndpointGroup {
    Vec2 point;
    std::vector<std::pair<std::size_t, int>> ends;
};

/// Groups open-chain endpoints by coincidence, in order of first appearance.
inline std::vector<EndpointGroup> group_endpoints(std::span<const Interface> interfaces) {
    const double tol = junction_tolerance(interfaces);
    std::vector<EndpointGroup> groups;
    for (std::size_t i = 0; i < interfaces.size(); ++i) {
        const auto& chain = interfaces[i].chain;
        if (chain.closed || chain.vertices.empty()) continue;
        for (int side = 0; side < 2; ++side) {
            Vec2 p = side == 0 ? chain.vertices.front() : chain.vertices.back();
            auto it = std::find_if(groups.begin(), groups.end(),
                                   [&](const EndpointGroup& g) { return distance(g.point, p) <= tol; });
            if (it == groups.end()) {
                groups.push_back({p, {{i, side}}});
            } else {
                it->ends.emplace_back(i, side);
            }
        }
    }
    return groups;
}

/// Finds a pair of segments that cross or touch where they should not.
/// Segments adjacent in a chain may share their common vertex; open-chain end
/// segments may meet at a shared junction. Uses a uniform grid, so the cost is
/// close to linear for well-spread chains.
inline std::optional<std::pair<detail::SegmentRef, detail::SegmentRef>> find_crossing(
    std::span<const Interface> interfaces) {
    using detail::SegmentRef;
    std::vector<SegmentRef> segs;
    double total_len = 0.0;
    for (std::size_t c = 0; c < interfaces.size(); ++c) {
        const auto& ch = interfaces[c].chain;
        for (std::size_t e = 0; e < ch.edge_count(); ++e) {
            segs.push_back({c, e});
            auto [a, b] = ch.edge(e);
            total_len += distance(a, b);
        }
    }
    if (segs.size() < 2) return std::nullopt;
    const double tol = junction_tolerance(interfaces);
    double cell = std::max(total_len / static_cast<double>(segs.size()), tol);

    auto seg_points = [&](const SegmentRef& s) { return interfaces[s.chain].chain.edge(s.edge); };
    auto key = [](long long ix, long long iy) { return (static_cast<unsigned long long>(ix) << 32) ^ static_cast<unsigned long long>(iy & 0xffffffffLL); };

    std::unordered_map<unsigned long long, std::vector<std::size_t>> grid;
    for (std::size_t s = 0; s < segs.size(); ++s) {
        auto [a, b] = seg_points(segs[s]);
        long long x0 = static_cast<long long>(std::floor(std::min(a.x, b.x) / cell));
        long long x1 = static_cast<long long>(std::floor(std::max(a.x, b.x) / cell));
        long long y0 = static_cast<long long>(std::floor(std::min(a.y, b.y) / cell));
        long long y1 = static_cast<long long>(std::floor(std::max(a.y, b.y) / cell));
        for (long long ix = x0; ix <= x1; ++ix)
            for (long long iy = y0; iy <= y1; ++iy) grid[key(ix, iy)].push_back(s);
    }

    auto adjacent = [&](const SegmentRef& s, const SegmentRef& t) {
        if (s.chain != t.chain) return false;
        const auto& ch = interfaces[s.chain].chain;
        std::size_t m = ch.edge_count();
        std::size_t d = s.edge > t.edge ? s.edge - t.edge : t.edge - s.edge;
        return d == 1 || (ch.closed && d == m - 1);
    };
    // Returns the chain endpoint touched by this end segment, if any.
    auto chain_end_vertex = [&](const SegmentRef& s, Vec2 p) -> bool {
        const auto& ch = interfaces[s.chain].chain;
        if (ch.closed) return false;
        if (s.edge == 0 && distance(ch.vertices.front(), p) <= tol) return true;
        if (s.edge + 1 == ch.edge_count() && distance(ch.vertices.back(), p) <= tol) return true;
        return false;
    };

    std::set<std::pair<std::size_t, std::size_t>> tested;
    for (const auto& [k, bucket] : grid) {
        for (std::size_t i = 0; i < bucket.size(); ++i) {
            for (std::size_t j = i + 1; j < bucket.size(); ++j) {
                std::size_t s = std::min(bucket[i], bucket[j]);
                std::size_t t = std::max(bucket[i], bucket[j]);
                if (!tested.emplace(s, t).second) continue;
                const auto& rs = segs[s];
                const auto& rt = segs[t];
                if (rs.chain == rt.chain && rs.edge == rt.edge) continue;
                auto [p1, p2] = seg_points(rs);
                auto [q1, q2] = seg_points(rt);
                if (adjacent(rs, rt)) {
                    // Adjacent edges may only share their common vertex; a fold-back
                    // would make one edge's far end lie on the other.
                    Vec2 p_other = (p2 == q1 || p2 == q2) ? p1 : p2;
                    Vec2 q_other = (q1 == p1 || q1 == p2) ? q2 : q1;
                    bool fold = (detail::orient(p1, p2, q_other) == 0 && detail::on_segment(p1, p2, q_other)) ||
                                (detail::orient(q1, q2, p_other) == 0 && detail::on_segment(q1, q2, p_other));
                    if (fold) return std::make_pair(rs, rt);
                    continue;
                }
                if (!detail::segments_intersect(p1, p2, q1, q2)) continue;
                // Permitted contact: both are end segments meeting at one junction.
                bool allowed = false;
                for (Vec2 p : {p1, p2}) {
                    for (Vec2 q : {q1, q2}) {
                        if (distance(p, q) <= tol && chain_end_vertex(rs, p) && chain_end_vertex(rt, q)) {
                            // Touching only at the junction: the other ends must stay apart.
                            Vec2 po = (p == p1) ? p2 : p1;
                            Vec2 qo = (q == q1) ? q2 : q1;
                            bool collinear_overlap = (detail::orient(p1, p2, qo) == 0 && detail::on_segment(p1, p2, qo)) ||
                                                     (detail::orient(q1, q2, po) == 0 && detail::on_segment(q1, q2, po));
                            allowed = !collinear_overlap;
                        }
                    }
                }
                if (!allowed) return std::make_pair(rs, rt);
            }
        }
    }
    return std::nullopt;
}

/// Immutable planar cluster. Construction validates every structural
/// invariant and throws StructuralError / DegenerateChamberError.
class Cluster {
public:
    Cluster(std::vector<Chamber> chambers, std::vector<Interface> interfaces, double lambda = 0.0,
            double r0 = std::numeric_limits<double>::infinity())
        : chambers_(std::move(chambers)), interfaces_(std::move(interfaces)), lambda_(lambda), r0_(r0) {
        validate();
    }

    [[nodiscard]] const std::vector<Chamber>& chambers() const { return chambers_; }
    [[nodiscard]] const std::vector<Interface>& interfaces() const { return interfaces_; }
    [[nodiscard]] double lambda() const { return lambda_; }
    [[nodiscard]] double r0() const { return r0_; }
    [[nodiscard]] std::size_t chamber_count() const { return chambers_.size(); }

    /// Position of a chamber label in `chambers()`, or nullopt.
    [[nodiscard]] std::optional<std::size_t> chamber_index(int label) const {
        for (std::size_t i = 0; i < chambers_.size(); ++i)
            if (chambers_[i].label == label) return i;
        return std::nullopt;
    }

private:
    void validate() const;

    std::vector<Chamber> chambers_;
    std::vector<Interface> interfaces_;
    double lambda_;
    double r0_;
};

/// Signed area of each chamber, in `chambers()` order. Does not validate.
inline std::vector<double> raw_chamber_areas(std::span<const Chamber> chambers, std::span<const Interface> interfaces) {
    std::vector<double> areas(chambers.size(), 0.0);
    auto index_of = [&](int label) -> std::optional<std::size_t> {
        for (std::size_t i = 0; i < chambers.size(); ++i)
            if (chambers[i].label == label) return i;
        return std::nullopt;
    };
    for (const auto& f : interfaces) {
        double c = f.chain.signed_area_contribution();
        if (auto i = index_of(f.left)) areas[*i] += c;
        if (auto i = index_of(f.right)) areas[*i] -= c;
    }
    return areas;
}

inline void Cluster::validate() const {
    if (!(lambda_ >= 0.0) || !std::isfinite(lambda_)) throw StructuralError("lambda must be finite and non-negative");
    if (!(r0_ > 0.0)) throw StructuralError("r0 must be positive");
    if (chambers_.empty()) throw StructuralError("cluster needs at least one chamber");

    std::set<int> labels;
    for (const auto& c : chambers_) {
        if (c.label <= 0) throw StructuralError("chamber labels must be positive (0 is the exterior)");
        if (!labels.insert(c.label).second) throw StructuralError("duplicate chamber label " + std::to_string(c.label));
    }
    for (std::size_t i = 0; i < interfaces_.size(); ++i) {
        const auto& f = interfaces_[i];
        const std::string where = "interface " + std::to_string(i);
        if (f.left == f.right) throw StructuralError(where + " separates a chamber from itself");
        for (int l : {f.left, f.right})
            if (l != 0 && !labels.contains(l)) throw StructuralError(where + " references unknown chamber " + std::to_string(l));
        const auto& v = f.chain.vertices;
        if (v.size() < 2) throw StructuralError(where + " has fewer than 2 vertices");
        if (f.chain.closed && v.size() < 3) throw StructuralError(where + " is a closed chain with fewer than 3 vertices");
        for (auto p : v)
            if (!std::isfinite(p.x) || !std::isfinite(p.y)) throw StructuralError(where + " has a non-finite vertex");
        for (std::size_t e = 0; e < f.chain.edge_count(); ++e) {
            auto [a, b] = f.chain.edge(e);
            if (a == b) throw StructuralError(where + " has a zero-length edge at vertex " + std::to_string(e));
        }
        if (!(f.chain.length() > 0.0)) throw StructuralError(where + " has zero length");
    }
    for (const auto& g : group_endpoints(interfaces_)) {
        if (g.ends.size() != 3)
            throw StructuralError("chain endpoint at (" + std::to_string(g.point.x) + ", " + std::to_string(g.point.y) +
                                  ") is shared by " + std::to_string(g.ends.size()) + " chain ends, expected 3");
    }
    if (auto hit = find_crossing(interfaces_)) {
        throw StructuralError("interfaces " + std::to_string(hit->first.chain) + " (edge " + std::to_string(hit->first.edge) +
                              ") and " + std::to_string(hit->second.chain) + " (edge " + std::to_string(hit->second.edge) +
                              ") intersect");
    }
    auto areas = raw_chamber_areas(chambers_, interfaces_);
    for (std::size_t i = 0; i < areas.size(); ++i) {
        if (!(areas[i] > 0.0))
            throw DegenerateChamberError("chamber " + std::to_string(chambers_[i].label) + " has non-positive area " +
                                         std::to_string(areas[i]));
    }
}

/// Total interface length; each interface counted once.
inline double perimeter(const Cluster& cluster) {
    double total = 0.0;
    for (const auto& f : cluster.interfaces()) total += f.chain.length();
    return total;
}

/// Length of the part of segment [a, b] inside the ball, from the exact
/// segment/circle intersection parameters.
inline double segment_length_in_ball(Vec2 a, Vec2 b, const Ball& ball) {
    const double len = distance(a, b);
    if (len == 0.0) return 0.0;
    const Vec2 u = (1.0 / len) * (b - a);
    const Vec2 f = a - ball.center;
    const double r = ball.radius;
    // Work from the foot of the perpendicular and measure each clipped end
    // from the segment endpoint inside the ball, so nothing cancels at small r.
    const double perp = std::abs(cross(u, f));
    if (perp >= r) return 0.0;
    const double half = std::sqrt((r - perp) * (r + perp));
    const double s0 = -dot(f, u);
    if (s0 + half <= 0.0 || s0 - half >= len) return 0.0;
    const bool a_inside = s0 - half < 0.0;
    const bool b_inside = s0 + half > len;
    if (a_inside && b_inside) return len;
    if (a_inside) return s0 + half;
    if (b_inside) return dot(b - ball.center, u) + half;
    return 2.0 * half;
}

/// P(E; B): interface length inside the ball.
inline double localized_perimeter(const Cluster& cluster, const Ball& ball) {
    double total = 0.0;
    for (const auto& f : cluster.interfaces()) {
        const auto& ch = f.chain;
        for (std::size_t e = 0; e < ch.edge_count(); ++e) {
            auto [a, b] = ch.edge(e);
            total += segment_length_in_ball(a, b, ball);
        }
    }
    return total;
}

/// Chamber areas (the volume vector m), in `chambers()` order.
inline std::vector<double> chamber_areas(const Cluster& cluster) {
    auto areas = raw_chamber_areas(cluster.chambers(), cluster.interfaces());
    for (std::size_t i = 0; i < areas.size(); ++i)
        if (!(areas[i] > 0.0))
            throw DegenerateChamberError("chamber " + std::to_string(cluster.chambers()[i].label) + " has non-positive area");
    return areas;
}

struct BoundaryProjection {
    Vec2 point;
    double distance = std::numeric_limits<double>::infinity();
    std::size_t interface = 0;
    std::size_t edge = 0;
};

/// Closest point on any interface chain.
inline BoundaryProjection project_to_boundary(const Cluster& cluster, Vec2 x) {
    BoundaryProjection best;
    const auto& fs = cluster.interfaces();
    for (std::size_t i = 0; i < fs.size(); ++i) {
        const auto& ch = fs[i].chain;
        for (std::size_t e = 0; e < ch.edge_count(); ++e) {
            auto [a, b] = ch.edge(e);
            Vec2 d = b - a;
            double t = std::clamp(dot(x - a, d) / dot(d, d), 0.0, 1.0);
            Vec2 p = a + t * d;
            double dist = distance(p, x);
            if (dist < best.distance) best = {p, dist, i, e};
        }
    }
    return best;
}

/// Applies `map` to every vertex. Junction sharing survives as long as the
/// map is deterministic.
template <class Map>
Cluster transformed(const Cluster& cluster, Map&& map) {
    auto interfaces = cluster.interfaces();
    for (auto& f : interfaces)
        for (auto& v : f.chain.vertices) v = map(v);
    return Cluster(cluster.chambers(), std::move(interfaces), cluster.lambda(), cluster.r0());
}

} // namespace csing
