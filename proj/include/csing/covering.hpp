#pragma once

// Combinatorial core of the singular-point count: occupied annuli around
// points of a finite set, the covering bound (10 / lambda^2)^{nN} and a total
// decision procedure for it, a traced replay of the inductive
// diameter-splitting argument, Vitali ball covers, and the dyadic set showing
// that the exponential dependence on N cannot be improved.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <type_traits>
#include <string>
#include <unordered_map>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "csing/error.hpp"

namespace csing::covering {

/// Finite set of points in R^n, stored row-major.
class PointSet {
public:
    PointSet(std::size_t dimension, std::vector<double> coords) : dim_(dimension), coords_(std::move(coords)) {
        if (dim_ == 0) throw ParameterError("point set dimension must be positive");
        if (coords_.size() % dim_ != 0) throw ParameterError("coordinate count is not a multiple of the dimension");
        for (std::size_t i = 0; i < size(); ++i) {
            double r2 = 0.0;
            for (double c : point(i)) {
                if (!std::isfinite(c)) throw ParameterError("point coordinates must be finite");
                r2 += c * c;
            }
            if (std::sqrt(r2) > 0.5) throw ParameterError("point " + std::to_string(i) + " lies outside the ball of radius 1/2");
        }
        std::vector<std::size_t> order(size());
        std::iota(order.begin(), order.end(), std::size_t{0});
        auto less = [&](std::size_t a, std::size_t b) {
            auto pa = point(a), pb = point(b);
            return std::lexicographical_compare(pa.begin(), pa.end(), pb.begin(), pb.end());
        };
        std::sort(order.begin(), order.end(), less);
        for (std::size_t k = 1; k < order.size(); ++k)
            if (!less(order[k - 1], order[k])) throw ParameterError("points must be pairwise distinct");
    }

    [[nodiscard]] std::size_t dimension() const { return dim_; }
    [[nodiscard]] std::size_t size() const { return coords_.size() / dim_; }
    [[nodiscard]] std::span<const double> point(std::size_t i) const { return {coords_.data() + i * dim_, dim_}; }
    [[nodiscard]] const std::vector<double>& coords() const { return coords_; }

    [[nodiscard]] double distance(std::size_t i, std::size_t j) const {
        double s = 0.0;
        auto a = point(i), b = point(j);
        for (std::size_t k = 0; k < dim_; ++k) s += (a[k] - b[k]) * (a[k] - b[k]);
        return std::sqrt(s);
    }

private:
    std::size_t dim_;
    std::vector<double> coords_;
};

/// Admissible scale ratios: (0, 1/4]. The lemma's own range is (0, 1/5);
/// 1/4 is admitted for the dyadic sharpness construction, and the inductive
/// argument only needs lambda <= 1/2.
inline void check_scale_ratio(double lambda) {
    if (!(lambda > 0.0 && lambda <= 0.25)) throw ParameterError("scale_ratio must lie in (0, 1/4]");
}

/// The unique j >= 0 with lambda^{j+1} <= d < lambda^j; distances >= 1 map to 0.
inline int annulus_index(double d, double lambda) {
    if (!(d > 0.0)) throw ParameterError("annulus_index needs a positive distance");
    if (d >= 1.0) return 0;
    int j = std::max(0, static_cast<int>(std::floor(std::log(d) / std::log(lambda))) - 1);
    while (std::pow(lambda, j + 1) > d) ++j;
    while (j > 0 && std::pow(lambda, j) <= d) --j;
    return j;
}

struct AnnulusOccupancy {
    std::size_t base_index = 0;
    double scale_ratio = 0.0;
    /// Sorted annulus indices j holding at least one other point.
    std::vector<int> occupied;
};

inline AnnulusOccupancy occupied_annuli(const PointSet& set, std::size_t index, double scale_ratio) {
    check_scale_ratio(scale_ratio);
    if (index >= set.size()) throw ParameterError("point index out of range");
    AnnulusOccupancy occ{index, scale_ratio, {}};
    for (std::size_t j = 0; j < set.size(); ++j) {
        if (j == index) continue;
        occ.occupied.push_back(annulus_index(set.distance(index, j), scale_ratio));
    }
    std::sort(occ.occupied.begin(), occ.occupied.end());
    occ.occupied.erase(std::unique(occ.occupied.begin(), occ.occupied.end()), occ.occupied.end());
    return occ;
}

/// Non-negative count that saturates instead of overflowing.
struct CountBound {
    std::uint64_t value = 0;
    bool saturated = false;

    [[nodiscard]] bool admits(std::uint64_t n) const { return saturated || n <= value; }
    [[nodiscard]] std::string to_string() const { return saturated ? "unbounded" : std::to_string(value); }
};

/// floor((10 / lambda^2)^{n N}), saturating on overflow of 64 bits.
inline CountBound covering_bound(std::size_t dimension, double scale_ratio, int budget) {
    check_scale_ratio(scale_ratio);
    if (budget < 0) throw ParameterError("budget must be non-negative");
    if (dimension == 0) throw ParameterError("dimension must be positive");
    const double base = 10.0 / (scale_ratio * scale_ratio);
    const std::uint64_t exponent = dimension * static_cast<std::uint64_t>(budget);
    const double rounded = std::round(base);
    if (std::abs(base - rounded) <= 1e-9 * base) {
        auto b = static_cast<std::uint64_t>(rounded);
        std::uint64_t v = 1;
        for (std::uint64_t k = 0; k < exponent; ++k)
            if (__builtin_mul_overflow(v, b, &v)) return {std::numeric_limits<std::uint64_t>::max(), true};
        return {v, false};
    }
    long double lv = std::pow(static_cast<long double>(base), static_cast<long double>(exponent));
    if (!(lv < 18446744073709551616.0L)) return {std::numeric_limits<std::uint64_t>::max(), true};
    return {static_cast<std::uint64_t>(std::floor(lv)), false};
}

enum class VerdictKind { WithinBudget, Witness };

struct CoveringVerdict {
    VerdictKind kind = VerdictKind::WithinBudget;
    /// Set when kind == Witness: the first point whose occupancy exceeds the budget.
    std::optional<std::size_t> witness_index;
    std::size_t witness_occupancy = 0;
    std::size_t max_occupancy = 0;
    std::size_t set_size = 0;
    CountBound bound;
    /// For WithinBudget: whether |X| <= bound (the lemma says always).
    bool bound_holds = true;
};

namespace detail {

template <class OccupancyFn>
CoveringVerdict decide(std::size_t size, int budget, CountBound bound, OccupancyFn&& occupancy) {
    CoveringVerdict v;
    v.set_size = size;
    v.bound = bound;
    for (std::size_t i = 0; i < size; ++i) {
        std::size_t occ = occupancy(i);
        v.max_occupancy = std::max(v.max_occupancy, occ);
        if (!v.witness_index && occ > static_cast<std::size_t>(budget)) {
            v.witness_index = i;
            v.witness_occupancy = occ;
        }
    }
    v.kind = v.witness_index ? VerdictKind::Witness : VerdictKind::WithinBudget;
    v.bound_holds = v.kind == VerdictKind::Witness || bound.admits(size);
    return v;
}

} // namespace detail

/// Exhaustive decision: either every point occupies at most `budget` annuli
/// (and then |X| <= covering_bound), or the first point that occupies more.
inline CoveringVerdict verify_covering_lemma(const PointSet& set, double scale_ratio, int budget) {
    auto bound = covering_bound(set.dimension(), scale_ratio, budget);
    return detail::decide(set.size(), budget, bound,
                          [&](std::size_t i) { return occupied_annuli(set, i, scale_ratio).occupied.size(); });
}

// ---------------------------------------------------------------------------
// Vitali covers

struct VitaliCover {
    std::size_t dimension = 0;
    double mu = 0.0;
    std::vector<double> centers;

    [[nodiscard]] std::size_t size() const { return centers.size() / dimension; }
    [[nodiscard]] std::span<const double> center(std::size_t i) const { return {centers.data() + i * dimension, dimension}; }
};

namespace detail {

/// Hash grid over points in R^n for fixed-radius neighbour queries.
class PointGrid {
public:
    PointGrid(std::size_t dim, double cell) : dim_(dim), cell_(cell), base_(dim), probe_(dim) {
        // The query's own cell comes first so that early-exit searches usually stop there.
        offsets_.assign(dim_, 0);
        std::vector<int> off(dim_, -1);
        while (true) {
            if (std::any_of(off.begin(), off.end(), [](int v) { return v != 0; }))
                offsets_.insert(offsets_.end(), off.begin(), off.end());
            std::size_t k = 0;
            while (k < dim_ && off[k] == 1) off[k++] = -1;
            if (k == dim_) break;
            ++off[k];
        }
    }

    void insert(std::span<const double> p, std::size_t id) {
        cell_of(p, base_);
        cells_[key(base_)].push_back(id);
    }

    /// Calls f(id) for every point in the cells within one cell of p. If f
    /// returns bool, a true result stops the search.
    template <class F>
    void for_each_near(std::span<const double> p, F&& f) const {
        cell_of(p, base_);
        for (std::size_t o = 0; o < offsets_.size(); o += dim_) {
            for (std::size_t k = 0; k < dim_; ++k) probe_[k] = base_[k] + offsets_[o + k];
            auto it = cells_.find(key(probe_));
            if (it == cells_.end()) continue;
            for (auto id : it->second) {
                if constexpr (std::is_same_v<std::invoke_result_t<F&, std::size_t>, bool>) {
                    if (f(id)) return;
                } else {
                    f(id);
                }
            }
        }
    }

private:
    void cell_of(std::span<const double> p, std::vector<long long>& out) const {
        for (std::size_t k = 0; k < dim_; ++k) out[k] = static_cast<long long>(std::floor(p[k] / cell_));
    }
    static std::uint64_t key(const std::vector<long long>& c) {
        std::uint64_t h = 1469598103934665603ULL;
        for (auto v : c) h = (h ^ static_cast<std::uint64_t>(v)) * 1099511628211ULL;
        return h;
    }

    std::size_t dim_;
    double cell_;
    std::vector<int> offsets_;
    mutable std::vector<long long> base_, probe_;
    std::unordered_map<std::uint64_t, std::vector<std::size_t>> cells_;
};

} // namespace detail

/// Centers of a Vitali cover of B_1: a maximal family of points of
/// B_{1 - mu/5} at mutual distance >= 2 mu / 5, extracted greedily from a
/// cubic lattice of spacing mu / (5 sqrt n) in lexicographic lattice order.
/// The mu/5-balls are disjoint, so the count is at most (5 / mu)^n.
inline VitaliCover vitali_cover(std::size_t dimension, double mu) {
    if (dimension == 0) throw ParameterError("dimension must be positive");
    if (!(mu > 0.0 && mu <= 1.0)) throw ParameterError("mu must lie in (0, 1]");
    const double inner = 1.0 - mu / 5.0;
    const double spacing = mu / (5.0 * std::sqrt(static_cast<double>(dimension)));
    const double sep = 2.0 * mu / 5.0;
    const auto G = static_cast<long long>(std::floor(inner / spacing));

    VitaliCover cover{dimension, mu, {}};
    detail::PointGrid grid(dimension, sep);
    std::vector<long long> idx(dimension, -G);
    std::vector<double> p(dimension);
    while (true) {
        double r2 = 0.0;
        for (std::size_t k = 0; k < dimension; ++k) {
            p[k] = static_cast<double>(idx[k]) * spacing;
            r2 += p[k] * p[k];
        }
        if (r2 <= inner * inner) {
            bool free = true;
            grid.for_each_near(p, [&](std::size_t id) {
                if (!free) return;
                auto c = cover.center(id);
                double d2 = 0.0;
                for (std::size_t k = 0; k < dimension; ++k) d2 += (c[k] - p[k]) * (c[k] - p[k]);
                if (d2 < sep * sep) free = false;
            });
            if (free) {
                std::size_t id = cover.size();
                cover.centers.insert(cover.centers.end(), p.begin(), p.end());
                grid.insert(p, id);
            }
        }
        std::size_t k = 0;
        while (k < dimension && idx[k] == G) idx[k++] = -G;
        if (k == dimension) break;
        ++idx[k];
    }
    return cover;
}

/// (5 / mu)^n.
inline double vitali_count_bound(std::size_t dimension, double mu) {
    return std::pow(5.0 / mu, static_cast<double>(dimension));
}

struct VitaliCheck {
    bool count_ok = false;
    bool disjoint = false;
    bool centers_inside = false;
    std::size_t uncovered = 0;
    std::size_t samples = 0;
};

/// Checks the cover post-conditions; the covering property is tested on
/// `samples` uniform points of B_1.
inline VitaliCheck check_vitali_cover(const VitaliCover& cover, std::size_t samples, std::uint64_t seed) {
    const std::size_t n = cover.dimension;
    const double mu = cover.mu;
    VitaliCheck out;
    out.samples = samples;
    out.count_ok = static_cast<double>(cover.size()) <= vitali_count_bound(n, mu) * (1.0 + 1e-12);
    out.centers_inside = true;
    for (std::size_t i = 0; i < cover.size(); ++i) {
        double r2 = 0.0;
        for (double c : cover.center(i)) r2 += c * c;
        if (std::sqrt(r2) > 1.0 - mu / 5.0 + 1e-12) out.centers_inside = false;
    }
    // Disjointness: no two centers closer than 2 mu / 5.
    {
        detail::PointGrid grid(n, 2.0 * mu / 5.0);
        for (std::size_t i = 0; i < cover.size(); ++i) grid.insert(cover.center(i), i);
        out.disjoint = true;
        for (std::size_t i = 0; i < cover.size() && out.disjoint; ++i) {
            auto a = cover.center(i);
            grid.for_each_near(a, [&](std::size_t j) {
                if (j <= i) return;
                auto b = cover.center(j);
                double d2 = 0.0;
                for (std::size_t k = 0; k < n; ++k) d2 += (a[k] - b[k]) * (a[k] - b[k]);
                if (d2 < (2.0 * mu / 5.0) * (2.0 * mu / 5.0)) out.disjoint = false;
            });
        }
    }
    detail::PointGrid grid(n, mu);
    for (std::size_t i = 0; i < cover.size(); ++i) grid.insert(cover.center(i), i);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::vector<double> p(n);
    for (std::size_t s = 0; s < samples; ++s) {
        // Uniform in B_1: Gaussian direction, radius U^{1/n}.
        double r2 = 0.0;
        for (auto& c : p) {
            c = gauss(rng);
            r2 += c * c;
        }
        double scale = std::pow(unif(rng), 1.0 / static_cast<double>(n)) / std::sqrt(r2);
        for (auto& c : p) c *= scale;
        bool covered = false;
        grid.for_each_near(p, [&](std::size_t id) {
            auto c = cover.center(id);
            double d2 = 0.0;
            for (std::size_t k = 0; k < n; ++k) d2 += (c[k] - p[k]) * (c[k] - p[k]);
            covered = d2 < mu * mu;
            return covered;
        });
        if (!covered) ++out.uncovered;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Traced replay of the inductive argument

struct ReplayStep {
    /// Budget at this level of the induction.
    int level = 0;
    std::size_t points = 0;
    double diameter = 0.0;
    /// d lies in [lambda^{k+1}, lambda^k).
    int scale = 0;
    std::size_t balls = 0;
    std::size_t points_in_chosen_ball = 0;
    /// Threshold the chosen ball must exceed: bound at level - 1.
    std::uint64_t required = 0;
    /// Whether annulus `scale` or `scale + 1` around the final witness holds a point of this level's set.
    bool diameter_annulus_occupied = false;
};

struct ProofReplay {
    std::vector<ReplayStep> steps;
    std::size_t witness_index = 0;
    std::size_t witness_occupancy = 0;
};

/// Follows the induction on N for a set with more than covering_bound
/// points: at each level take the diameter scale k, cover B_{lambda^k}(x0) by
/// Vitali balls of radius lambda^{k+2}/2, keep a ball holding more than the
/// next level's bound, and recurse. The surviving point occupies more than N
/// annuli. Every claim of the argument is checked along the way.
inline ProofReplay replay_covering_proof(const PointSet& set, double scale_ratio, int budget) {
    check_scale_ratio(scale_ratio);
    auto top = covering_bound(set.dimension(), scale_ratio, budget);
    if (top.admits(set.size())) throw ParameterError("proof replay needs more than covering_bound points");
    const std::size_t n = set.dimension();
    const double lambda = scale_ratio;
    const auto unit_cover = vitali_cover(n, lambda * lambda / 2.0);

    ProofReplay replay;
    std::vector<std::size_t> current(set.size());
    std::iota(current.begin(), current.end(), std::size_t{0});
    std::vector<std::vector<std::size_t>> level_sets;
    for (int level = budget; level >= 1; --level) {
        ReplayStep step;
        step.level = level;
        step.points = current.size();
        double d = 0.0;
        for (std::size_t a = 0; a < current.size(); ++a)
            for (std::size_t b = a + 1; b < current.size(); ++b) d = std::max(d, set.distance(current[a], current[b]));
        step.diameter = d;
        step.scale = annulus_index(d, lambda);
        const double top_radius = std::pow(lambda, step.scale);
        const double ball_radius = top_radius * lambda * lambda / 2.0;
        auto x0 = set.point(current.front());
        std::vector<std::vector<std::size_t>> members(unit_cover.size());
        for (auto id : current) {
            auto p = set.point(id);
            bool placed = false;
            for (std::size_t b = 0; b < unit_cover.size() && !placed; ++b) {
                auto c = unit_cover.center(b);
                double d2 = 0.0;
                for (std::size_t k = 0; k < n; ++k) {
                    double ck = x0[k] + top_radius * c[k];
                    d2 += (p[k] - ck) * (p[k] - ck);
                }
                if (d2 < ball_radius * ball_radius) {
                    members[b].push_back(id);
                    placed = true;
                }
            }
            if (!placed) throw Error("proof replay: Vitali balls failed to cover the set");
        }
        step.balls = unit_cover.size();
        auto best = std::max_element(members.begin(), members.end(),
                                     [](const auto& a, const auto& b) { return a.size() < b.size(); });
        step.points_in_chosen_ball = best->size();
        step.required = covering_bound(n, lambda, level - 1).value;
        if (best->size() <= step.required) throw Error("proof replay: pigeonhole step failed");
        level_sets.push_back(current);
        replay.steps.push_back(step);
        current = *best;
    }
    if (current.size() < 2) throw Error("proof replay: base case needs two points");
    replay.witness_index = current.front();
    // Each level contributes annulus k or k + 1 around the witness.
    for (std::size_t s = 0; s < replay.steps.size(); ++s) {
        auto& step = replay.steps[s];
        for (auto id : level_sets[s]) {
            if (id == replay.witness_index) continue;
            int j = annulus_index(set.distance(replay.witness_index, id), lambda);
            if (j == step.scale || j == step.scale + 1) step.diameter_annulus_occupied = true;
        }
    }
    replay.witness_occupancy = occupied_annuli(set, replay.witness_index, lambda).occupied.size();
    return replay;
}

// ---------------------------------------------------------------------------
// Exact dyadic points and the sharpness construction

using DyadicInt = boost::multiprecision::int256_t;

/// Points of R given exactly as numerator / 2^exponent.
struct DyadicPointSet {
    int exponent = 0;
    std::vector<DyadicInt> numerators;

    [[nodiscard]] std::size_t size() const { return numerators.size(); }
    [[nodiscard]] double to_double(std::size_t i) const {
        return std::ldexp(numerators[i].convert_to<double>(), -exponent);
    }
};

inline constexpr int kMaxSharpnessBudget = 20;

/// All 2^N points sum_{i=1}^N (-1)^{e_i} 2^{-12 i}, exact. Point k uses
/// e_i = bit (i - 1) of k.
inline DyadicPointSet sharpness_points(int budget) {
    if (budget < 1 || budget > kMaxSharpnessBudget) throw ParameterError("sharpness budget must lie in [1, 20]");
    DyadicPointSet set;
    set.exponent = 12 * budget;
    const std::size_t count = std::size_t{1} << budget;
    set.numerators.reserve(count);
    for (std::size_t k = 0; k < count; ++k) {
        DyadicInt p = 0;
        for (int i = 1; i <= budget; ++i) {
            DyadicInt term = DyadicInt(1) << (12 * (budget - i));
            if ((k >> (i - 1)) & 1U) p -= term; else p += term;
        }
        set.numerators.push_back(p);
    }
    return set;
}

/// Annulus index of |a - b| for lambda = 2^{-shift}, exact.
inline int dyadic_annulus_index(const DyadicInt& a, const DyadicInt& b, int exponent, int shift) {
    DyadicInt d = a > b ? DyadicInt(a - b) : DyadicInt(b - a);
    if (d == 0) throw ParameterError("dyadic points must be distinct");
    auto bit = static_cast<int>(boost::multiprecision::msb(d));
    if (bit >= exponent) return 0;
    return (exponent - 1 - bit) / shift;
}

inline int dyadic_shift(double scale_ratio) {
    check_scale_ratio(scale_ratio);
    int e = 0;
    double m = std::frexp(scale_ratio, &e);
    if (m != 0.5) throw ParameterError("exact occupancy needs a power-of-two scale ratio");
    return 1 - e;
}

inline AnnulusOccupancy occupied_annuli(const DyadicPointSet& set, std::size_t index, double scale_ratio) {
    const int shift = dyadic_shift(scale_ratio);
    if (index >= set.size()) throw ParameterError("point index out of range");
    AnnulusOccupancy occ{index, scale_ratio, {}};
    for (std::size_t j = 0; j < set.size(); ++j) {
        if (j == index) continue;
        occ.occupied.push_back(dyadic_annulus_index(set.numerators[index], set.numerators[j], set.exponent, shift));
    }
    std::sort(occ.occupied.begin(), occ.occupied.end());
    occ.occupied.erase(std::unique(occ.occupied.begin(), occ.occupied.end()), occ.occupied.end());
    return occ;
}

inline CoveringVerdict verify_covering_lemma(const DyadicPointSet& set, double scale_ratio, int budget) {
    auto bound = covering_bound(1, scale_ratio, budget);
    return detail::decide(set.size(), budget, bound,
                          [&](std::size_t i) { return occupied_annuli(set, i, scale_ratio).occupied.size(); });
}

struct SharpnessCheck {
    std::size_t points = 0;
    bool distinct = true;
    /// 2^{-12 j} <= |p - q| <= 2^{-12 j + 2} whenever p, q first differ at coordinate j.
    bool distances_ok = true;
    std::size_t pairs_checked = 0;
    /// Largest per-point occupancy at lambda = 1/4.
    std::size_t max_occupancy = 0;
};

/// Exact check of the sharpness construction for budget N.
inline SharpnessCheck check_sharpness(const DyadicPointSet& set, int budget) {
    SharpnessCheck out;
    out.points = set.size();
    const int K = set.exponent;
    for (std::size_t a = 0; a < set.size(); ++a) {
        std::vector<char> seen(static_cast<std::size_t>(K) + 1, 0);
        std::size_t occupied = 0;
        for (std::size_t b = 0; b < set.size(); ++b) {
            if (a == b) continue;
            DyadicInt d = set.numerators[a] - set.numerators[b];
            if (d < 0) d = -d;
            if (d == 0) {
                out.distinct = false;
                continue;
            }
            if (b > a) {
                int j = std::countr_zero(a ^ b) + 1;
                DyadicInt lo = DyadicInt(1) << (K - 12 * j);
                DyadicInt hi = DyadicInt(1) << (K - 12 * j + 2);
                if (d < lo || d > hi) out.distances_ok = false;
                ++out.pairs_checked;
            }
            auto bit = static_cast<int>(boost::multiprecision::msb(d));
            int idx = bit >= K ? 0 : (K - 1 - bit) / 2;
            if (!seen[static_cast<std::size_t>(idx)]) {
                seen[static_cast<std::size_t>(idx)] = 1;
                ++occupied;
            }
        }
        out.max_occupancy = std::max(out.max_occupancy, occupied);
    }
    (void)budget;
    return out;
}

} // namespace csing::covering
