#pragma once

// Volume-constrained perimeter minimization on polygonal clusters.
//
// The energy is the augmented Lagrangian
//     E(x) = L(x) - sum_h mu_h c_h(x) + (rho / 2) sum_h c_h(x)^2,   c_h = A_h - m_h,
// minimized over vertex positions by L-BFGS directions with a backtracking
// (Armijo) line search, so every accepted step lowers E; multipliers are
// updated as mu_h <- mu_h - rho c_h after each inexact inner solve. Junction vertices are single
// degrees of freedom shared by their three chains, so the triple-junction
// combinatorics are fixed by the initial guess and never change.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "csing/geometry.hpp"

namespace csing {

struct OptimizerConfig {
    std::vector<double> target_volumes;
    /// First trial step of the line search, in length units.
    double step_size = 1e-2;
    /// Dimensionless penalty weight; scaled internally by the target size.
    double penalty_weight = 10.0;
    int max_iterations = 400000;
    /// Bound on the max-norm of the Lagrangian gradient at convergence.
    double gradient_tolerance = 1e-6;
    /// Bound on |A_h - m_h| / m_h at convergence.
    double volume_tolerance = 1e-7;
    /// When true, junctions move as shared degrees of freedom; when false
    /// they stay pinned at their initial positions.
    bool junction_projection = true;
    /// Admissible box [m0, M0] for the targets.
    double volume_min = 0.0;
    double volume_max = std::numeric_limits<double>::infinity();
    /// Largest relative area change accepted in a single descent step.
    double max_volume_drift = 1e-2;
    /// Number of curvature pairs kept by the quasi-Newton direction.
    int history = 12;
    /// Interval (in descent steps) between convergence-log rows.
    int log_every = 250;
};

struct ConvergenceRecord {
    int iteration = 0;
    double energy = 0.0;
    double max_volume_error = 0.0;
    double grad_norm = 0.0;
};

struct OptimizerResult {
    Cluster cluster;
    double final_perimeter = 0.0;
    /// A_h - m_h per chamber.
    std::vector<double> volume_errors;
    bool converged = false;
    int iterations = 0;
    double grad_norm = 0.0;
    std::vector<double> multipliers;
    std::vector<ConvergenceRecord> log;
    OptimizerConfig config;
};

namespace detail {

/// Vertex positions as a flat list of degrees of freedom plus, for each
/// chain, the dof index of every vertex.
struct DofLayout {
    struct ChainDofs {
        std::vector<std::size_t> ids;
        bool closed = false;
        int left = 0;
        int right = 0;
    };
    std::vector<Vec2> x;
    std::vector<char> pinned;
    std::vector<char> junction;
    std::vector<ChainDofs> chains;
    std::vector<Chamber> chambers;
    double lambda = 0.0;
    double r0 = std::numeric_limits<double>::infinity();

    static DofLayout from_cluster(const Cluster& c) {
        DofLayout L;
        L.chambers = c.chambers();
        L.lambda = c.lambda();
        L.r0 = c.r0();
        const auto& fs = c.interfaces();
        L.chains.resize(fs.size());
        std::vector<std::array<std::size_t, 2>> end_ids(fs.size());
        for (const auto& g : group_endpoints(fs)) {
            std::size_t id = L.x.size();
            L.x.push_back(g.point);
            L.junction.push_back(1);
            for (auto [chain, side] : g.ends) end_ids[chain][static_cast<std::size_t>(side)] = id;
        }
        for (std::size_t i = 0; i < fs.size(); ++i) {
            const auto& ch = fs[i].chain;
            auto& cd = L.chains[i];
            cd.closed = ch.closed;
            cd.left = fs[i].left;
            cd.right = fs[i].right;
            const std::size_t n = ch.vertices.size();
            for (std::size_t k = 0; k < n; ++k) {
                if (!ch.closed && k == 0) {
                    cd.ids.push_back(end_ids[i][0]);
                } else if (!ch.closed && k + 1 == n) {
                    cd.ids.push_back(end_ids[i][1]);
                } else {
                    cd.ids.push_back(L.x.size());
                    L.x.push_back(ch.vertices[k]);
                    L.junction.push_back(0);
                }
            }
        }
        L.pinned.assign(L.x.size(), 0);
        return L;
    }

    [[nodiscard]] std::vector<Interface> interfaces(const std::vector<Vec2>& pos) const {
        std::vector<Interface> out;
        out.reserve(chains.size());
        for (const auto& cd : chains) {
            Chain ch{{}, cd.closed};
            ch.vertices.reserve(cd.ids.size());
            for (auto id : cd.ids) ch.vertices.push_back(pos[id]);
            out.push_back({std::move(ch), cd.left, cd.right});
        }
        return out;
    }

    [[nodiscard]] Cluster to_cluster(const std::vector<Vec2>& pos) const {
        return Cluster(chambers, interfaces(pos), lambda, r0);
    }

    [[nodiscard]] std::optional<std::size_t> chamber_index(int label) const {
        for (std::size_t i = 0; i < chambers.size(); ++i)
            if (chambers[i].label == label) return i;
        return std::nullopt;
    }

    template <class F>
    void for_each_edge(F&& f) const {
        for (std::size_t c = 0; c < chains.size(); ++c) {
            const auto& ids = chains[c].ids;
            std::size_t m = chains[c].closed ? ids.size() : ids.size() - 1;
            for (std::size_t e = 0; e < m; ++e) f(c, ids[e], ids[(e + 1) % ids.size()]);
        }
    }
};

struct EnergyEval {
    double length = 0.0;
    std::vector<double> areas;
    std::vector<Vec2> grad_length;
    std::vector<std::vector<Vec2>> grad_areas;
};

inline EnergyEval evaluate(const DofLayout& L, const std::vector<Vec2>& x, bool with_gradient) {
    EnergyEval ev;
    const std::size_t nc = L.chambers.size();
    ev.areas.assign(nc, 0.0);
    if (with_gradient) {
        ev.grad_length.assign(x.size(), Vec2{});
        ev.grad_areas.assign(nc, std::vector<Vec2>(x.size(), Vec2{}));
    }
    std::vector<std::optional<std::size_t>> left_idx(L.chains.size()), right_idx(L.chains.size());
    for (std::size_t c = 0; c < L.chains.size(); ++c) {
        left_idx[c] = L.chamber_index(L.chains[c].left);
        right_idx[c] = L.chamber_index(L.chains[c].right);
    }
    L.for_each_edge([&](std::size_t c, std::size_t i, std::size_t j) {
        Vec2 a = x[i], b = x[j];
        Vec2 d = b - a;
        double len = norm(d);
        ev.length += len;
        double area = 0.5 * cross(a, b);
        if (left_idx[c]) ev.areas[*left_idx[c]] += area;
        if (right_idx[c]) ev.areas[*right_idx[c]] -= area;
        if (!with_gradient) return;
        Vec2 u = d / len;
        ev.grad_length[i] -= u;
        ev.grad_length[j] += u;
        Vec2 ga = -0.5 * perp(b);
        Vec2 gb = 0.5 * perp(a);
        if (left_idx[c]) {
            ev.grad_areas[*left_idx[c]][i] += ga;
            ev.grad_areas[*left_idx[c]][j] += gb;
        }
        if (right_idx[c]) {
            ev.grad_areas[*right_idx[c]][i] -= ga;
            ev.grad_areas[*right_idx[c]][j] -= gb;
        }
    });
    return ev;
}

/// Solves the small dense system A x = b by Gaussian elimination with
/// partial pivoting; returns zeros for singular systems.
inline std::vector<double> solve_dense(std::vector<std::vector<double>> A, std::vector<double> b) {
    const std::size_t n = b.size();
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < n; ++r)
            if (std::abs(A[r][col]) > std::abs(A[piv][col])) piv = r;
        if (std::abs(A[piv][col]) < 1e-300) return std::vector<double>(n, 0.0);
        std::swap(A[piv], A[col]);
        std::swap(b[piv], b[col]);
        for (std::size_t r = col + 1; r < n; ++r) {
            double f = A[r][col] / A[col][col];
            for (std::size_t k = col; k < n; ++k) A[r][k] -= f * A[col][k];
            b[r] -= f * b[col];
        }
    }
    std::vector<double> out(n);
    for (std::size_t i = n; i-- > 0;) {
        double s = b[i];
        for (std::size_t k = i + 1; k < n; ++k) s -= A[i][k] * out[k];
        out[i] = s / A[i][i];
    }
    return out;
}

/// Multipliers minimizing |grad L - sum mu_h grad A_h| over free dofs.
inline std::vector<double> least_squares_multipliers(const DofLayout& L, const EnergyEval& ev) {
    const std::size_t nc = ev.areas.size();
    std::vector<std::vector<double>> G(nc, std::vector<double>(nc, 0.0));
    std::vector<double> rhs(nc, 0.0);
    for (std::size_t i = 0; i < L.x.size(); ++i) {
        if (L.pinned[i]) continue;
        for (std::size_t h = 0; h < nc; ++h) {
            rhs[h] += dot(ev.grad_areas[h][i], ev.grad_length[i]);
            for (std::size_t k = 0; k < nc; ++k) G[h][k] += dot(ev.grad_areas[h][i], ev.grad_areas[k][i]);
        }
    }
    return solve_dense(std::move(G), std::move(rhs));
}

/// Limited-memory BFGS two-loop recursion over flattened vertex vectors.
class LbfgsHistory {
public:
    explicit LbfgsHistory(int capacity) : capacity_(static_cast<std::size_t>(std::max(0, capacity))) {}

    void clear() { pairs_.clear(); }
    [[nodiscard]] bool empty() const { return pairs_.empty(); }

    void push(const std::vector<Vec2>& x, const std::vector<Vec2>& x_old, const std::vector<Vec2>& g,
              const std::vector<Vec2>& g_old) {
        if (capacity_ == 0) return;
        Pair p;
        p.s.resize(x.size());
        p.y.resize(x.size());
        double sy = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            p.s[i] = x[i] - x_old[i];
            p.y[i] = g[i] - g_old[i];
            sy += dot(p.s[i], p.y[i]);
        }
        if (!(sy > 1e-300)) return; // curvature condition failed; skip the pair
        p.rho = 1.0 / sy;
        if (pairs_.size() == capacity_) pairs_.erase(pairs_.begin());
        pairs_.push_back(std::move(p));
    }

    /// dir = -H g.
    void direction(const std::vector<Vec2>& g, std::vector<Vec2>& dir) const {
        dir = g;
        std::vector<double> alpha(pairs_.size());
        for (std::size_t k = pairs_.size(); k-- > 0;) {
            const auto& p = pairs_[k];
            double a = 0.0;
            for (std::size_t i = 0; i < g.size(); ++i) a += dot(p.s[i], dir[i]);
            a *= p.rho;
            alpha[k] = a;
            for (std::size_t i = 0; i < g.size(); ++i) dir[i] -= a * p.y[i];
        }
        if (!pairs_.empty()) {
            const auto& p = pairs_.back();
            double yy = 0.0;
            for (const auto& y : p.y) yy += dot(y, y);
            double gamma = 1.0 / (p.rho * yy);
            for (auto& d : dir) d *= gamma;
        }
        for (std::size_t k = 0; k < pairs_.size(); ++k) {
            const auto& p = pairs_[k];
            double b = 0.0;
            for (std::size_t i = 0; i < g.size(); ++i) b += dot(p.y[i], dir[i]);
            b *= p.rho;
            for (std::size_t i = 0; i < g.size(); ++i) dir[i] += (alpha[k] - b) * p.s[i];
        }
        for (auto& d : dir) d = -1.0 * d;
    }

private:
    struct Pair {
        std::vector<Vec2> s, y;
        double rho = 0.0;
    };
    std::size_t capacity_;
    std::vector<Pair> pairs_;
};

/// Redistributes the interior vertices of one chain uniformly by arc length.
inline void redistribute_chain(const DofLayout& L, std::size_t c, std::vector<Vec2>& x) {
    const auto& cd = L.chains[c];
    std::vector<Vec2> pts;
    for (auto id : cd.ids) pts.push_back(x[id]);
    if (cd.closed) pts.push_back(pts.front());
    std::vector<double> s{0.0};
    for (std::size_t k = 1; k < pts.size(); ++k) s.push_back(s.back() + distance(pts[k - 1], pts[k]));
    const double total = s.back();
    const std::size_t edges = pts.size() - 1;
    std::size_t seg = 0;
    for (std::size_t k = 1; k < cd.ids.size(); ++k) {
        if (!cd.closed && k + 1 == cd.ids.size()) break;
        double target = total * static_cast<double>(k) / static_cast<double>(edges);
        while (seg + 1 < s.size() - 1 && s[seg + 1] < target) ++seg;
        double t = (target - s[seg]) / (s[seg + 1] - s[seg]);
        x[cd.ids[k]] = pts[seg] + t * (pts[seg + 1] - pts[seg]);
    }
}

} // namespace detail

/// Mean edge length over all chains.
inline double mean_edge_length(const Cluster& c) {
    double total = 0.0;
    std::size_t n = 0;
    for (const auto& f : c.interfaces()) {
        total += f.chain.length();
        n += f.chain.edge_count();
    }
    return n ? total / static_cast<double>(n) : 0.0;
}

/// Runs the augmented-Lagrangian descent from `initial`. Non-convergence is
/// reported through `converged`; collapse or crossing of interfaces throws
/// TopologyError.
namespace detail {

/// True when no edge turns by more than 30 degrees between `a` and `b`; a
/// line-search step that fails this could fold a chain onto itself.
inline bool edges_keep_direction(const DofLayout& L, const std::vector<Vec2>& a, const std::vector<Vec2>& b) {
    constexpr double kCos30 = 0.8660254037844387;
    for (const auto& ch : L.chains) {
        const std::size_t n = ch.ids.size();
        const std::size_t ne = ch.closed ? n : n - 1;
        for (std::size_t e = 0; e < ne; ++e) {
            const std::size_t i = ch.ids[e], j = ch.ids[(e + 1) % n];
            const Vec2 ea = a[j] - a[i], eb = b[j] - b[i];
            if (dot(ea, eb) <= kCos30 * norm(ea) * norm(eb)) return false;
        }
    }
    return true;
}

} // namespace detail

inline OptimizerResult minimize(const Cluster& initial, const OptimizerConfig& config) {
    const auto& m = config.target_volumes;
    const std::size_t nc = initial.chamber_count();
    if (m.size() != nc) throw ParameterError("target_volumes must have one entry per chamber");
    for (double v : m) {
        if (!(v > 0.0)) throw ParameterError("target volumes must be positive");
        if (v < config.volume_min || v > config.volume_max) throw ParameterError("target volume outside the [m0, M0] box");
    }
    if (!(config.step_size > 0.0) || !(config.penalty_weight > 0.0) || config.max_iterations <= 0 ||
        !(config.gradient_tolerance > 0.0) || !(config.volume_tolerance > 0.0) || !(config.max_volume_drift > 0.0))
        throw ParameterError("optimizer step, penalty, iteration and tolerance settings must be positive");
    {
        auto a0 = chamber_areas(initial);
        for (std::size_t h = 0; h < nc; ++h)
            if (a0[h] > 10.0 * m[h] || a0[h] < m[h] / 10.0)
                throw ParameterError("initial chamber area is not within a factor 10 of its target");
    }

    auto L = detail::DofLayout::from_cluster(initial);
    if (!config.junction_projection)
        for (std::size_t i = 0; i < L.x.size(); ++i) L.pinned[i] = L.junction[i];
    std::vector<Vec2> x = L.x;

    double mean_target = 0.0;
    for (double v : m) mean_target += v;
    mean_target /= static_cast<double>(nc);
    const double length_scale = std::sqrt(mean_target);
    const double rho = config.penalty_weight / (length_scale * length_scale * length_scale);
    const double floor_length = 1e-3 * mean_edge_length(initial);

    auto constraint = [&](const std::vector<double>& areas) {
        std::vector<double> c(nc);
        for (std::size_t h = 0; h < nc; ++h) c[h] = areas[h] - m[h];
        return c;
    };
    auto max_rel_error = [&](const std::vector<double>& c) {
        double e = 0.0;
        for (std::size_t h = 0; h < nc; ++h) e = std::max(e, std::abs(c[h]) / m[h]);
        return e;
    };
    auto energy_of = [&](const detail::EnergyEval& ev, const std::vector<double>& mu) {
        auto c = constraint(ev.areas);
        double e = ev.length;
        for (std::size_t h = 0; h < nc; ++h) e += -mu[h] * c[h] + 0.5 * rho * c[h] * c[h];
        return e;
    };
    // Gradient of E: grad L - sum (mu - rho c) grad A.
    auto gradient_of = [&](const detail::EnergyEval& ev, const std::vector<double>& mu, std::vector<Vec2>& g) {
        auto c = constraint(ev.areas);
        g.assign(x.size(), Vec2{});
        double gmax = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            if (L.pinned[i]) continue;
            Vec2 gi = ev.grad_length[i];
            for (std::size_t h = 0; h < nc; ++h) gi -= (mu[h] - rho * c[h]) * ev.grad_areas[h][i];
            g[i] = gi;
            gmax = std::max(gmax, norm(gi));
        }
        return gmax;
    };

    auto ev = detail::evaluate(L, x, true);
    std::vector<double> mu = detail::least_squares_multipliers(L, ev);
    std::vector<Vec2> g;
    double gnorm = gradient_of(ev, mu, g);
    double energy = energy_of(ev, mu);

    OptimizerResult result{initial, 0.0, {}, false, 0, gnorm, {}, {}, config};
    auto log_row = [&](int it) {
        result.log.push_back({it, energy, max_rel_error(constraint(ev.areas)), gnorm});
    };
    log_row(0);

    auto is_converged = [&] {
        return gnorm <= config.gradient_tolerance && max_rel_error(constraint(ev.areas)) <= config.volume_tolerance;
    };

    int it = 0;
    bool converged = is_converged();
    std::vector<Vec2> trial(x.size());
    std::vector<Vec2> dir(x.size());
    std::vector<Vec2> g_old;
    std::vector<Vec2> x_old;
    detail::LbfgsHistory history(config.history);
    // Inexact inner solves: the tolerance tightens after every multiplier update.
    double inner_tol = std::max(config.gradient_tolerance, 1e-3);
    while (!converged && it < config.max_iterations) {
        bool stalled = false;
        history.clear();
        while (gnorm > inner_tol && it < config.max_iterations) {
            history.direction(g, dir);
            double slope = 0.0;
            for (std::size_t i = 0; i < x.size(); ++i) slope += dot(dir[i], g[i]);
            if (!(slope < 0.0)) {
                history.clear();
                for (std::size_t i = 0; i < x.size(); ++i) dir[i] = -1.0 * g[i];
                slope = 0.0;
                for (const auto& gi : g) slope -= dot(gi, gi);
            }
            double dmax = 0.0;
            for (const auto& d : dir) dmax = std::max(dmax, norm(d));
            // Never move a vertex farther than step_size in one trial.
            double t = history.empty() ? std::min(1.0, config.step_size / dmax) : std::min(1.0, 10.0 * config.step_size / dmax);
            detail::EnergyEval tev;
            bool accepted = false;
            while (t * dmax > 1e-15 * length_scale) {
                for (std::size_t i = 0; i < x.size(); ++i) trial[i] = x[i] + t * dir[i];
                tev = detail::evaluate(L, trial, false);
                double tenergy = energy_of(tev, mu);
                double drift = 0.0;
                for (std::size_t h = 0; h < nc; ++h) drift = std::max(drift, std::abs(tev.areas[h] - ev.areas[h]) / m[h]);
                if (tenergy <= energy + 1e-4 * t * slope && drift <= config.max_volume_drift && detail::edges_keep_direction(L, x, trial)) {
                    accepted = true;
                    break;
                }
                t *= 0.5;
            }
            if (!accepted) {
                stalled = true;
                break;
            }
            x_old = x;
            g_old = g;
            x.swap(trial);
            ++it;
            ev = detail::evaluate(L, x, true);
            energy = energy_of(ev, mu);
            gnorm = gradient_of(ev, mu, g);
            history.push(x, x_old, g, g_old);
            if (config.log_every > 0 && it % config.log_every == 0) log_row(it);

            if (it % 64 == 0) {
                bool remeshed = false;
                for (std::size_t c = 0; c < L.chains.size(); ++c) {
                    const auto& ids = L.chains[c].ids;
                    std::size_t ne = L.chains[c].closed ? ids.size() : ids.size() - 1;
                    double shortest = std::numeric_limits<double>::infinity();
                    double len = 0.0;
                    for (std::size_t e = 0; e < ne; ++e) {
                        double d = distance(x[ids[e]], x[ids[(e + 1) % ids.size()]]);
                        shortest = std::min(shortest, d);
                        len += d;
                    }
                    if (len < floor_length * static_cast<double>(ne))
                        throw TopologyError("interface " + std::to_string(c) + " collapsed below the resolution floor");
                    if (shortest < floor_length) {
                        detail::redistribute_chain(L, c, x);
                        remeshed = true;
                    }
                }
                if (remeshed) {
                    history.clear();
                    ev = detail::evaluate(L, x, true);
                    energy = energy_of(ev, mu);
                    gnorm = gradient_of(ev, mu, g);
                }
            }
        }
        auto c = constraint(ev.areas);
        double verr = max_rel_error(c);
        if (gnorm <= config.gradient_tolerance && verr <= config.volume_tolerance) {
            converged = true;
            break;
        }
        if (stalled && inner_tol <= config.gradient_tolerance && verr <= config.volume_tolerance) break;
        // Multiplier update, then tighten the inner tolerance.
        for (std::size_t h = 0; h < nc; ++h) mu[h] -= rho * c[h];
        energy = energy_of(ev, mu);
        gnorm = gradient_of(ev, mu, g);
        inner_tol = std::max(config.gradient_tolerance, 0.1 * inner_tol);
        converged = is_converged();
    }

    if (result.log.empty() || result.log.back().iteration != it) log_row(it);

    std::optional<Cluster> out;
    try {
        out.emplace(L.to_cluster(x));
    } catch (const Error& e) {
        throw TopologyError(std::string("optimized cluster is no longer valid: ") + e.what());
    }
    auto c = constraint(chamber_areas(*out));
    result.cluster = std::move(*out);
    result.final_perimeter = perimeter(result.cluster);
    result.volume_errors = c;
    result.converged = converged;
    result.iterations = it;
    result.grad_norm = gnorm;
    result.multipliers.resize(nc);
    {
        auto cc = constraint(ev.areas);
        for (std::size_t h = 0; h < nc; ++h) result.multipliers[h] = mu[h] - rho * cc[h];
    }
    return result;
}

/// Re-solves from a noise-perturbed copy of a converged result. Gaussian
/// noise of standard deviation `noise_scale` (length units) is added to every
/// vertex; junctions are perturbed once and stay shared. Deterministic for a
/// given seed. A perturbation that breaks the cluster throws TopologyError.
inline OptimizerResult perturb_and_resolve(const OptimizerResult& result, double noise_scale, std::uint64_t seed) {
    if (!(noise_scale >= 0.0)) throw ParameterError("noise_scale must be non-negative");
    if (noise_scale == 0.0) return minimize(result.cluster, result.config);
    auto L = detail::DofLayout::from_cluster(result.cluster);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, noise_scale);
    std::vector<Vec2> x = L.x;
    for (auto& p : x) {
        double dx = noise(rng);
        double dy = noise(rng);
        p += Vec2{dx, dy};
    }
    std::optional<Cluster> start;
    try {
        start.emplace(L.to_cluster(x));
    } catch (const Error& e) {
        throw TopologyError(std::string("perturbation broke the cluster: ") + e.what());
    }
    return minimize(*start, result.config);
}

/// Turning-based curvature at each interior vertex of a chain: the Menger
/// curvature of the vertex and its two neighbours, signed positive when the
/// chain turns left.
inline std::vector<double> vertex_curvatures(const Chain& chain) {
    std::vector<double> out;
    const auto& v = chain.vertices;
    const std::size_t n = v.size();
    if (n < 3) return out;
    std::size_t first = chain.closed ? 0 : 1;
    std::size_t last = chain.closed ? n : n - 1;
    for (std::size_t k = first; k < last; ++k) {
        Vec2 a = v[(k + n - 1) % n], b = v[k], c = v[(k + 1) % n];
        double denom = distance(a, b) * distance(b, c) * distance(a, c);
        out.push_back(denom > 0 ? 2.0 * cross(b - a, c - b) / denom : 0.0);
    }
    return out;
}

/// Spread of the vertex curvatures along each interface, relative to
/// max(|mean curvature|, 1 / sqrt(total area)). Vertices adjacent to a
/// junction are skipped; the polygonal data there reflects the junction
/// rather than the arc.
inline std::vector<double> curvature_spreads(const Cluster& c) {
    double total_area = 0.0;
    for (double a : chamber_areas(c)) total_area += a;
    const double floor = 1.0 / std::sqrt(total_area);
    std::vector<double> out;
    for (const auto& f : c.interfaces()) {
        auto k = vertex_curvatures(f.chain);
        if (!f.chain.closed && k.size() > 2) k = std::vector<double>(k.begin() + 1, k.end() - 1);
        if (k.empty()) {
            out.push_back(0.0);
            continue;
        }
        auto [lo, hi] = std::minmax_element(k.begin(), k.end());
        double mean = 0.0;
        for (double v : k) mean += v;
        mean /= static_cast<double>(k.size());
        out.push_back((*hi - *lo) / std::max(std::abs(mean), floor));
    }
    return out;
}

/// Largest interface curvature implied by the multipliers: an interface
/// between chambers i and j has curvature |mu_i - mu_j|, the exterior having
/// pressure 0. A cluster whose interfaces have curvature at most this value
/// has e^{Lambda r} P(B_r) / r nondecreasing with Lambda set to it.
inline double curvature_bound(const OptimizerResult& result) {
    const auto& c = result.cluster;
    auto pressure = [&](int label) {
        auto i = c.chamber_index(label);
        return i ? result.multipliers.at(*i) : 0.0;
    };
    double bound = 0.0;
    for (const auto& f : c.interfaces()) bound = std::max(bound, std::abs(pressure(f.left) - pressure(f.right)));
    return bound;
}

/// Unit tangent at the first vertex of the chain, taken from the circle
/// through its first three vertices (second-order accurate on arcs).
inline Vec2 start_tangent(const std::vector<Vec2>& pts) {
    Vec2 a = pts[0], b = pts[1];
    Vec2 chord = (b - a) / distance(a, b);
    if (pts.size() < 3) return chord;
    Vec2 c = pts[2];
    double d = 2.0 * cross(b - a, c - a);
    if (std::abs(d) < 1e-14 * distance(a, b) * distance(a, c)) return chord;
    Vec2 ab = b - a, ac = c - a;
    Vec2 center = a + Vec2{(ac.y * dot(ab, ab) - ab.y * dot(ac, ac)) / d, (ab.x * dot(ac, ac) - ac.x * dot(ab, ab)) / d};
    Vec2 t = perp(a - center);
    t = t / norm(t);
    return dot(t, chord) >= 0 ? t : -t;
}

/// Angles (degrees) between consecutive incident interfaces at every
/// junction, sorted ascending per junction.
inline std::vector<std::vector<double>> junction_angles(const Cluster& c) {
    std::vector<std::vector<double>> out;
    const auto& fs = c.interfaces();
    for (const auto& g : group_endpoints(fs)) {
        std::vector<double> dirs;
        for (auto [i, side] : g.ends) {
            auto pts = fs[i].chain.vertices;
            if (side == 1) std::reverse(pts.begin(), pts.end());
            Vec2 t = start_tangent(pts);
            dirs.push_back(std::atan2(t.y, t.x));
        }
        std::sort(dirs.begin(), dirs.end());
        std::vector<double> angles;
        for (std::size_t k = 0; k < dirs.size(); ++k) {
            double next = k + 1 < dirs.size() ? dirs[k + 1] : dirs[0] + 2.0 * kPi;
            angles.push_back((next - dirs[k]) * 180.0 / kPi);
        }
        std::sort(angles.begin(), angles.end());
        out.push_back(std::move(angles));
    }
    return out;
}

} // namespace csing
