#pragma once

// Singular points of planar clusters: the boundary graph, density-based
// classification with per-point annulus budgets, the covering certificate,
// reference cone densities, and canonical forms of labeled boundary graphs.

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "csing/covering.hpp"
#include "csing/geometry.hpp"
#include "csing/monotonicity.hpp"

namespace csing {

enum class PointKind { RegularSuspect, TripleJunction, Unknown };

inline const char* to_string(PointKind k) {
    switch (k) {
    case PointKind::RegularSuspect: return "regular_suspect";
    case PointKind::TripleJunction: return "triple_junction";
    case PointKind::Unknown: return "unknown";
    }
    return "unknown";
}

struct GraphEdge {
    std::size_t interface = 0;
    std::size_t from = 0;
    std::size_t to = 0;
    /// (min, max) chamber labels.
    std::pair<int, int> chambers;
};

struct BoundaryGraph {
    std::vector<Vec2> vertices;
    std::vector<GraphEdge> edges;
    /// Interface indices of closed chains.
    std::vector<std::size_t> loops;
    std::vector<std::pair<int, int>> loop_chambers;

    [[nodiscard]] std::size_t degree(std::size_t v) const {
        std::size_t d = 0;
        for (const auto& e : edges) d += (e.from == v) + (e.to == v);
        return d;
    }
};

inline BoundaryGraph extract_graph(const Cluster& cluster) {
    const auto& fs = cluster.interfaces();
    BoundaryGraph g;
    auto groups = group_endpoints(fs);
    std::vector<std::array<std::size_t, 2>> ends(fs.size());
    for (std::size_t v = 0; v < groups.size(); ++v) {
        const auto& grp = groups[v];
        if (grp.ends.size() != 3)
            throw StructuralError("boundary vertex " + std::to_string(v) + " has degree " + std::to_string(grp.ends.size()) +
                                  ", expected 3");
        std::set<std::pair<int, int>> pairs;
        for (auto [i, side] : grp.ends) {
            ends[i][static_cast<std::size_t>(side)] = v;
            pairs.insert(fs[i].pair());
        }
        if (pairs.size() != 3)
            throw StructuralError("boundary vertex " + std::to_string(v) + " joins two curves of the same interface");
        g.vertices.push_back(grp.point);
    }
    for (std::size_t i = 0; i < fs.size(); ++i) {
        if (fs[i].chain.closed) {
            g.loops.push_back(i);
            g.loop_chambers.push_back(fs[i].pair());
        } else {
            g.edges.push_back({i, ends[i][0], ends[i][1], fs[i].pair()});
        }
    }
    return g;
}

// ---------------------------------------------------------------------------
// Reference densities

enum class ConeType { HalfSpace, Y2D, YCone3D, TCone3D };

/// Density of the cone over the edges of a regular tetrahedron, by
/// integrating its six planar sectors inside the unit ball. Each sector is
/// approximated by a fan of `segments` triangles with apex at the origin and
/// base vertices on the unit-sphere arc between two tetrahedron vertices;
/// the fan areas are Richardson-extrapolated in the segment count.
inline double tcone_density_numeric(int segments = 2048) {
    using V3 = std::array<double, 3>;
    const double s = 1.0 / std::sqrt(3.0);
    const std::array<V3, 4> tips = {V3{s, s, s}, V3{s, -s, -s}, V3{-s, s, -s}, V3{-s, -s, s}};
    auto fan_area = [&](const V3& a, const V3& b, int m) {
        const double theta = std::acos(std::clamp(a[0] * b[0] + a[1] * b[1] + a[2] * b[2], -1.0, 1.0));
        auto slerp = [&](double t) {
            double wa = std::sin((1 - t) * theta) / std::sin(theta), wb = std::sin(t * theta) / std::sin(theta);
            return V3{wa * a[0] + wb * b[0], wa * a[1] + wb * b[1], wa * a[2] + wb * b[2]};
        };
        double area = 0.0;
        V3 p = a;
        for (int k = 1; k <= m; ++k) {
            V3 q = slerp(static_cast<double>(k) / m);
            V3 c{p[1] * q[2] - p[2] * q[1], p[2] * q[0] - p[0] * q[2], p[0] * q[1] - p[1] * q[0]};
            area += 0.5 * std::sqrt(c[0] * c[0] + c[1] * c[1] + c[2] * c[2]);
            p = q;
        }
        return area;
    };
    auto total = [&](int m) {
        double t = 0.0;
        for (std::size_t i = 0; i < 4; ++i)
            for (std::size_t j = i + 1; j < 4; ++j) t += fan_area(tips[i], tips[j], m);
        return t;
    };
    double coarse = total(segments / 2), fine = total(segments);
    double area = fine + (fine - coarse) / 3.0;
    return area / kPi;
}

/// The closed form quoted for the tetrahedral density, 12 arccos(sqrt(2/3)) / pi.
inline double quoted_tcone_density() { return 12.0 * std::acos(std::sqrt(2.0 / 3.0)) / kPi; }

/// Density of the cone: 1 for a half-space, 3/2 for Y cones in the plane and
/// in space, and 3 arccos(-1/3) / pi for the tetrahedral cone (six planar
/// sectors of opening arccos(-1/3), normalized by the unit-disk area).
inline double reference_density(ConeType cone) {
    switch (cone) {
    case ConeType::HalfSpace: return 1.0;
    case ConeType::Y2D: return 1.5;
    case ConeType::YCone3D: return 1.5;
    case ConeType::TCone3D: return 3.0 * std::acos(-1.0 / 3.0) / kPi;
    }
    return 0.0;
}

// ---------------------------------------------------------------------------
// Classification

inline constexpr double kTripleLow = 1.25;
inline constexpr double kTripleHigh = 1.75;
inline constexpr double kRegularLow = 0.9;
inline constexpr double kRegularHigh = 1.1;

struct ClassifyOptions {
    /// Largest radius of the density profile; 0 picks a quarter of the
    /// smallest junction separation (capped at 5% of the cluster diameter).
    double analysis_radius = 0.0;
    int radii_per_decade = 20;
    double scale_ratio = 0.125;
    double drop_threshold = 1e-3;
    /// Radius R of the certificate ball around the cluster centre; 0 picks the
    /// smallest R with the whole boundary inside B_R.
    double base_radius = 0.0;
    /// Deepest scale index for budgets; negative means every resolvable scale.
    int max_depth = -1;
    double monotone_tolerance = 1e-3;
    double error_tolerance = 0.02;
};

struct SingularPoint {
    Vec2 location;
    double density = 0.0;
    double density_error = 0.0;
    bool reliable = true;
    PointKind kind = PointKind::Unknown;
    std::size_t degree = 0;
    AnnulusBudget budget;
};

struct SingularityReport {
    std::vector<SingularPoint> points;
    /// Number of triple junctions.
    int count = 0;
    covering::CountBound certificate_bound;
    /// P(B_{2R}(x0)) / R.
    double perimeter_ratio = 0.0;
    Vec2 center;
    double base_radius = 0.0;
    double scale_ratio = 0.125;
    int max_budget = 0;
    bool all_untruncated = true;
    std::string canonical_class;
};

inline PointKind kind_for(double density, bool reliable, std::size_t degree) {
    if (!reliable) return PointKind::Unknown;
    if (degree == 3 && density >= kTripleLow && density <= kTripleHigh) return PointKind::TripleJunction;
    if (degree <= 2 && density >= kRegularLow && density <= kRegularHigh) return PointKind::RegularSuspect;
    return PointKind::Unknown;
}

namespace detail {

inline std::pair<Vec2, double> enclosing_ball(const Cluster& cluster) {
    Vec2 lo{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
    Vec2 hi = -lo;
    for (const auto& f : cluster.interfaces())
        for (auto p : f.chain.vertices) {
            lo = {std::min(lo.x, p.x), std::min(lo.y, p.y)};
            hi = {std::max(hi.x, p.x), std::max(hi.y, p.y)};
        }
    Vec2 c = 0.5 * (lo + hi);
    double r = 0.0;
    for (const auto& f : cluster.interfaces())
        for (auto p : f.chain.vertices) r = std::max(r, distance(c, p));
    return {c, r};
}

inline double auto_analysis_radius(const Cluster& cluster, const BoundaryGraph& g) {
    double r = 0.05 * bounding_diameter(cluster.interfaces());
    for (std::size_t a = 0; a < g.vertices.size(); ++a)
        for (std::size_t b = a + 1; b < g.vertices.size(); ++b) r = std::min(r, 0.25 * distance(g.vertices[a], g.vertices[b]));
    return std::min(r, cluster.r0());
}

inline int resolvable_depth(const Cluster& cluster, double R, double scale_ratio) {
    const double q = 2.0 * scale_ratio;
    const double ratio = resolution_floor(cluster) / (2.0 * R);
    return std::max(0, static_cast<int>(std::floor(std::log(ratio) / std::log(q))) - 2);
}

} // namespace detail

/// Density, kind and budget at one point. `degree` is the number of boundary
/// curves meeting there (3 at graph vertices, 2 elsewhere).
inline SingularPoint analyze_point(const Cluster& cluster, Vec2 x, std::size_t degree, double analysis_radius,
                                   double base_radius, const ClassifyOptions& opt) {
    SingularPoint sp;
    sp.degree = degree;
    auto radii = log_radii(analysis_radius / 10.0, analysis_radius, opt.radii_per_decade);
    auto prof = profile(cluster, x, radii);
    sp.location = prof.base_point;
    auto est = density(prof, opt.monotone_tolerance, opt.error_tolerance);
    sp.density = est.density;
    sp.density_error = est.error;
    sp.reliable = est.reliable;
    sp.kind = kind_for(est.density, est.reliable, degree);
    int depth = opt.max_depth >= 0 ? opt.max_depth : detail::resolvable_depth(cluster, base_radius, opt.scale_ratio);
    sp.budget = annulus_budget(cluster, sp.location, base_radius, opt.scale_ratio, opt.drop_threshold, depth);
    return sp;
}

inline std::string canonical_class(const BoundaryGraph& graph);

inline SingularityReport classify(const Cluster& cluster, const BoundaryGraph& graph, const ClassifyOptions& opt = {}) {
    if (!(opt.scale_ratio > 0.0 && opt.scale_ratio <= 0.125)) throw ParameterError("scale_ratio must lie in (0, 1/8]");
    SingularityReport rep;
    rep.scale_ratio = opt.scale_ratio;
    auto [center, cover] = detail::enclosing_ball(cluster);
    rep.center = center;
    rep.base_radius = opt.base_radius > 0.0 ? opt.base_radius : cover;
    rep.base_radius = std::min(rep.base_radius, 0.5 * cluster.r0());
    const double analysis = opt.analysis_radius > 0.0 ? opt.analysis_radius : detail::auto_analysis_radius(cluster, graph);
    if (analysis / 10.0 < resolution_floor(cluster)) throw ResolutionError("analysis radius below the resolution floor");

    for (std::size_t v = 0; v < graph.vertices.size(); ++v) {
        auto sp = analyze_point(cluster, graph.vertices[v], graph.degree(v), analysis, rep.base_radius, opt);
        if (sp.kind == PointKind::TripleJunction) ++rep.count;
        rep.max_budget = std::max(rep.max_budget, sp.budget.budget);
        rep.all_untruncated = rep.all_untruncated && !sp.budget.truncated;
        rep.points.push_back(std::move(sp));
    }
    rep.certificate_bound = covering::covering_bound(2, opt.scale_ratio, rep.max_budget);
    rep.perimeter_ratio = localized_perimeter(cluster, Ball(rep.center, 2.0 * rep.base_radius)) / rep.base_radius;
    rep.canonical_class = canonical_class(graph);
    return rep;
}

/// `count` points at arc-length midpoints of the longest stretches of the
/// boundary, away from junctions; used to probe regular points.
inline std::vector<Vec2> regular_sample_points(const Cluster& cluster, std::size_t count) {
    std::vector<Vec2> out;
    const auto& fs = cluster.interfaces();
    if (fs.empty() || count == 0) return out;
    double total = 0.0;
    for (const auto& f : fs) total += f.chain.length();
    for (std::size_t k = 0; k < count; ++k) {
        double target = total * (static_cast<double>(k) + 0.5) / static_cast<double>(count);
        for (const auto& f : fs) {
            double len = f.chain.length();
            if (target > len) {
                target -= len;
                continue;
            }
            // Keep away from chain ends: squeeze into the middle 80% of the chain.
            double t = f.chain.closed ? target : 0.1 * len + 0.8 * target;
            for (std::size_t e = 0; e < f.chain.edge_count(); ++e) {
                auto [a, b] = f.chain.edge(e);
                double el = distance(a, b);
                if (t <= el) {
                    out.push_back(a + (t / el) * (b - a));
                    break;
                }
                t -= el;
            }
            break;
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Canonical forms

namespace detail {

/// Colored multigraph used for canonicalization: exterior, chamber,
/// junction, edge and loop nodes. Chamber nodes are interchangeable, which is
/// exactly relabeling invariance.
struct LabeledGraph {
    std::vector<int> type;
    std::vector<std::vector<std::size_t>> adj;

    std::size_t add(int t) {
        type.push_back(t);
        adj.emplace_back();
        return type.size() - 1;
    }
    void link(std::size_t a, std::size_t b) {
        adj[a].push_back(b);
        adj[b].push_back(a);
    }
};

inline LabeledGraph labeled_graph(const BoundaryGraph& g) {
    enum : int { Exterior = 0, ChamberNode = 1, Junction = 2, EdgeNode = 3, LoopNode = 4 };
    LabeledGraph lg;
    std::map<int, std::size_t> chamber;
    auto chamber_node = [&](int label) {
        auto it = chamber.find(label);
        if (it != chamber.end()) return it->second;
        std::size_t id = lg.add(label == 0 ? Exterior : ChamberNode);
        chamber.emplace(label, id);
        return id;
    };
    chamber_node(0);
    std::vector<std::size_t> junction;
    for (std::size_t v = 0; v < g.vertices.size(); ++v) junction.push_back(lg.add(Junction));
    for (const auto& e : g.edges) {
        std::size_t id = lg.add(EdgeNode);
        lg.link(id, junction[e.from]);
        lg.link(id, junction[e.to]);
        lg.link(id, chamber_node(e.chambers.first));
        lg.link(id, chamber_node(e.chambers.second));
    }
    for (const auto& c : g.loop_chambers) {
        std::size_t id = lg.add(LoopNode);
        lg.link(id, chamber_node(c.first));
        lg.link(id, chamber_node(c.second));
    }
    return lg;
}

/// Equitable refinement: repeatedly re-rank nodes by (color, sorted neighbour colors).
inline std::vector<int> refine(const LabeledGraph& g, std::vector<int> color) {
    const std::size_t n = g.type.size();
    std::size_t classes = std::set<int>(color.begin(), color.end()).size();
    while (true) {
        std::vector<std::pair<int, std::vector<int>>> sig(n);
        for (std::size_t v = 0; v < n; ++v) {
            sig[v].first = color[v];
            for (auto u : g.adj[v]) sig[v].second.push_back(color[u]);
            std::sort(sig[v].second.begin(), sig[v].second.end());
        }
        auto sorted = sig;
        std::sort(sorted.begin(), sorted.end());
        sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
        for (std::size_t v = 0; v < n; ++v)
            color[v] = static_cast<int>(std::lower_bound(sorted.begin(), sorted.end(), sig[v]) - sorted.begin());
        if (sorted.size() == classes) return color;
        classes = sorted.size();
    }
}

inline std::string encode(const LabeledGraph& g, const std::vector<int>& color) {
    const std::size_t n = g.type.size();
    std::string s;
    std::vector<std::size_t> order(n);
    for (std::size_t v = 0; v < n; ++v) order[static_cast<std::size_t>(color[v])] = v;
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t v = order[i];
        std::vector<int> nb;
        for (auto u : g.adj[v]) nb.push_back(color[u]);
        std::sort(nb.begin(), nb.end());
        s += std::to_string(g.type[v]) + ":";
        for (std::size_t k = 0; k < nb.size(); ++k) s += (k ? "." : "") + std::to_string(nb[k]);
        s += ";";
    }
    return s;
}

/// Individualization-refinement search; returns the lexicographically
/// smallest leaf encoding.
inline void search(const LabeledGraph& g, std::vector<int> color, std::optional<std::string>& best) {
    color = refine(g, std::move(color));
    const std::size_t n = g.type.size();
    std::vector<std::size_t> size(n, 0);
    for (int c : color) ++size[static_cast<std::size_t>(c)];
    int target = -1;
    for (std::size_t c = 0; c < n; ++c)
        if (size[c] > 1) {
            target = static_cast<int>(c);
            break;
        }
    if (target < 0) {
        auto code = encode(g, color);
        if (!best || code < *best) best = std::move(code);
        return;
    }
    for (std::size_t v = 0; v < n; ++v) {
        if (color[v] != target) continue;
        std::vector<int> next(n);
        for (std::size_t u = 0; u < n; ++u) next[u] = 2 * color[u] + 1;
        next[v] = 2 * target;
        search(g, std::move(next), best);
    }
}

} // namespace detail

/// Canonical string of the boundary graph: equal for two graphs exactly when
/// they are isomorphic by a map of vertices and edges that respects
/// chamber-pair labels up to a relabeling of the chambers (the exterior
/// stays fixed). Geometry and orientation do not enter.
inline std::string canonical_class(const BoundaryGraph& graph) {
    auto lg = detail::labeled_graph(graph);
    std::optional<std::string> best;
    detail::search(lg, lg.type, best);
    std::size_t chambers = 0;
    for (int t : lg.type) chambers += (t == 1);
    return "V" + std::to_string(graph.vertices.size()) + "E" + std::to_string(graph.edges.size()) + "L" +
           std::to_string(graph.loops.size()) + "C" + std::to_string(chambers) + "|" + *best;
}

} // namespace csing
