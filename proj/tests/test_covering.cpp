#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "csing/covering.hpp"

using namespace csing;
using namespace csing::covering;

namespace {

PointSet line_set(std::vector<double> xs) { return PointSet(1, std::move(xs)); }

/// Independent annulus index: scan j upward.
int annulus_by_scan(double d, double lambda) {
    if (d >= 1.0) return 0;
    for (int j = 0;; ++j)
        if (std::pow(lambda, j + 1) <= d && d < std::pow(lambda, j)) return j;
}

} // namespace

TEST(OccupiedAnnuli, SingletonIsEmpty) {
    auto occ = occupied_annuli(line_set({0.1}), 0, 0.125);
    EXPECT_TRUE(occ.occupied.empty());
}

TEST(OccupiedAnnuli, MidpointOfAnnulusThree) {
    for (double lambda : {0.1, 0.125, 1.0 / 6.0, 0.19}) {
        double d = 0.5 * (std::pow(lambda, 3) + std::pow(lambda, 4));
        auto occ = occupied_annuli(PointSet(2, {0, 0, d, 0}), 0, lambda);
        ASSERT_EQ(occ.occupied.size(), 1u);
        EXPECT_EQ(occ.occupied[0], 3);
    }
}

TEST(OccupiedAnnuli, HalfOpenConvention) {
    // Distance exactly lambda^2 belongs to annulus 1, i.e. [lambda^2, lambda).
    EXPECT_EQ(annulus_index(0.0625, 0.25), 1);
    EXPECT_EQ(annulus_index(0.25, 0.25), 0);
    EXPECT_EQ(annulus_index(1.0, 0.25), 0);
}

TEST(OccupiedAnnuli, PartitionAgreesWithScan) {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-12.0, 0.0);
    for (double lambda : {1.0 / 6.0, 0.125, 0.25}) {
        for (int t = 0; t < 2000; ++t) {
            double d = std::pow(10.0, u(rng));
            int j = annulus_index(d, lambda);
            EXPECT_EQ(j, annulus_by_scan(d, lambda));
            EXPECT_LE(std::pow(lambda, j + 1), d);
            EXPECT_LT(d, std::pow(lambda, j));
        }
    }
}

TEST(OccupiedAnnuli, InvariantUnderRigidMotion) {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(-0.15, 0.15);
    for (int t = 0; t < 50; ++t) {
        std::vector<double> a, b;
        const double th = 2.0 * t;
        for (int i = 0; i < 40; ++i) {
            double x = u(rng) * std::pow(0.3, i % 5), y = u(rng) * std::pow(0.3, i % 5);
            a.insert(a.end(), {x, y});
            b.insert(b.end(), {std::cos(th) * x - std::sin(th) * y + 0.2, std::sin(th) * x + std::cos(th) * y - 0.1});
        }
        PointSet A(2, a), B(2, b);
        for (std::size_t i = 0; i < A.size(); ++i) {
            auto oa = occupied_annuli(A, i, 0.125).occupied, ob = occupied_annuli(B, i, 0.125).occupied;
            // Rounding can only move a distance sitting on an annulus edge.
            EXPECT_EQ(oa, ob);
        }
    }
}

TEST(OccupiedAnnuli, RejectsBadArguments) {
    auto s = line_set({0.0, 0.1});
    EXPECT_THROW(occupied_annuli(s, 0, 0.3), ParameterError);
    EXPECT_THROW(occupied_annuli(s, 0, 0.0), ParameterError);
    EXPECT_THROW(occupied_annuli(s, 5, 0.1), ParameterError);
}

TEST(PointSet, EnforcesInvariants) {
    EXPECT_THROW(line_set({0.6}), ParameterError);
    EXPECT_THROW(line_set({0.1, 0.1}), ParameterError);
    EXPECT_THROW(PointSet(2, {0.1, 0.2, 0.3}), ParameterError);
    EXPECT_NO_THROW(PointSet(2, {0.5, 0.0, -0.5, 0.0}));
}

TEST(CoveringBound, Values) {
    EXPECT_EQ(covering_bound(3, 0.125, 0).value, 1u);
    EXPECT_EQ(covering_bound(1, 0.25, 1).value, 160u);
    EXPECT_EQ(covering_bound(2, 0.125, 2).value, 167772160000ULL);
    EXPECT_EQ(covering_bound(1, 1.0 / 6.0, 1).value, 360u);
    EXPECT_FALSE(covering_bound(2, 0.125, 2).saturated);
}

TEST(CoveringBound, SaturatesOnOverflow) {
    auto b = covering_bound(3, 0.125, 5);
    EXPECT_TRUE(b.saturated);
    EXPECT_TRUE(b.admits(std::numeric_limits<std::uint64_t>::max()));
    EXPECT_EQ(b.to_string(), "unbounded");
    // 160^8 fits, 160^9 does not.
    EXPECT_EQ(covering_bound(1, 0.25, 8).value, 429496729600000000ULL);
    EXPECT_TRUE(covering_bound(1, 0.25, 9).saturated);
}

TEST(Verify, LargeSetYieldsWitness) {
    // 400 points on a line, bound 360 at budget 1.
    std::vector<double> xs;
    for (int i = 0; i < 400; ++i) xs.push_back(-0.5 + i / 400.0);
    auto v = verify_covering_lemma(line_set(xs), 1.0 / 6.0, 1);
    ASSERT_EQ(v.kind, VerdictKind::Witness);
    ASSERT_TRUE(v.witness_index.has_value());
    EXPECT_GT(occupied_annuli(line_set(xs), *v.witness_index, 1.0 / 6.0).occupied.size(), 1u);
    // Budget 0: any two points.
    EXPECT_EQ(verify_covering_lemma(line_set({0.0, 0.3}), 0.125, 0).kind, VerdictKind::Witness);
}

TEST(Verify, AntipodalPairWithinBudgetOne) {
    auto v = verify_covering_lemma(PointSet(2, {0.25, 0.0, -0.25, 0.0}), 0.125, 1);
    EXPECT_EQ(v.kind, VerdictKind::WithinBudget);
    EXPECT_TRUE(v.bound_holds);
    EXPECT_FALSE(v.witness_index.has_value());
}

TEST(Verify, RandomSetsAreSound) {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(-0.28, 0.28);
    for (int t = 0; t < 60; ++t) {
        std::size_t dim = 1 + static_cast<std::size_t>(t % 3);
        std::vector<double> c;
        for (int i = 0; i < 60; ++i)
            for (std::size_t k = 0; k < dim; ++k) c.push_back(u(rng) * std::pow(0.2, i % 4));
        PointSet s(dim, c);
        for (int budget = 0; budget < 6; ++budget) {
            auto v = verify_covering_lemma(s, 0.125, budget);
            if (v.kind == VerdictKind::WithinBudget) {
                EXPECT_TRUE(v.bound_holds);
                EXPECT_LE(v.max_occupancy, static_cast<std::size_t>(budget));
            } else {
                EXPECT_GT(v.witness_occupancy, static_cast<std::size_t>(budget));
            }
        }
    }
}

TEST(Sharpness, BudgetOneIsTwoDyadicPoints) {
    auto s = sharpness_points(1);
    ASSERT_EQ(s.size(), 2u);
    EXPECT_EQ(s.to_double(0), std::ldexp(1.0, -12));
    EXPECT_EQ(s.to_double(1), -std::ldexp(1.0, -12));
    EXPECT_EQ(s.numerators[0] - s.numerators[1], DyadicInt(2));
    EXPECT_EQ(s.exponent, 12);
}

TEST(Sharpness, BudgetThreeHasEightPointsWithLowOccupancy) {
    auto s = sharpness_points(3);
    auto c = check_sharpness(s, 3);
    EXPECT_EQ(c.points, 8u);
    EXPECT_TRUE(c.distinct);
    EXPECT_TRUE(c.distances_ok);
    EXPECT_LE(c.max_occupancy, 3u);
    for (std::size_t i = 0; i < s.size(); ++i) EXPECT_LE(occupied_annuli(s, i, 0.25).occupied.size(), 3u);
}

TEST(Sharpness, BudgetEightWithinBudgetDespiteSize) {
    auto v = verify_covering_lemma(sharpness_points(8), 0.25, 8);
    EXPECT_EQ(v.kind, VerdictKind::WithinBudget);
    EXPECT_EQ(v.set_size, 256u);
    EXPECT_TRUE(v.bound_holds);
}

TEST(Sharpness, DyadicOccupancyMatchesFloatingPointWhereRepresentable) {
    auto s = sharpness_points(4);
    std::vector<double> xs;
    for (std::size_t i = 0; i < s.size(); ++i) xs.push_back(s.to_double(i));
    PointSet p(1, xs);
    for (std::size_t i = 0; i < s.size(); ++i)
        EXPECT_EQ(occupied_annuli(s, i, 0.25).occupied, occupied_annuli(p, i, 0.25).occupied);
}

TEST(Sharpness, RejectsOutOfRangeBudget) {
    EXPECT_THROW(sharpness_points(0), ParameterError);
    EXPECT_THROW(sharpness_points(21), ParameterError);
    EXPECT_THROW(occupied_annuli(sharpness_points(2), 0, 0.2), ParameterError);
}

TEST(Vitali, UnitIntervalWithRadiusOne) {
    auto cover = vitali_cover(1, 1.0);
    EXPECT_LE(cover.size(), 5u);
    auto c = check_vitali_cover(cover, 10000, 1);
    EXPECT_TRUE(c.disjoint);
    EXPECT_EQ(c.uncovered, 0u);
    // [-1, 1] is covered deterministically too.
    for (double x = -1.0; x <= 1.0; x += 1e-3) {
        bool hit = false;
        for (std::size_t i = 0; i < cover.size(); ++i) hit = hit || std::abs(cover.center(i)[0] - x) < 1.0;
        EXPECT_TRUE(hit);
    }
}

TEST(Vitali, PlaneWithFifthRadius) {
    auto cover = vitali_cover(2, 0.2);
    EXPECT_LE(cover.size(), 625u);
    auto c = check_vitali_cover(cover, 100000, 2);
    EXPECT_TRUE(c.count_ok);
    EXPECT_TRUE(c.disjoint);
    EXPECT_TRUE(c.centers_inside);
    EXPECT_EQ(c.uncovered, 0u);
}

TEST(Vitali, PackingCoversAtTwiceThePackingRadius) {
    // Maximality: every lattice-admissible point lies within 2 mu / 5 of a center.
    const double mu = 0.5;
    auto cover = vitali_cover(2, mu);
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int t = 0; t < 5000; ++t) {
        double x = u(rng), y = u(rng);
        if (std::hypot(x, y) > 1.0 - mu / 5.0) continue;
        double best = 1e9;
        for (std::size_t i = 0; i < cover.size(); ++i)
            best = std::min(best, std::hypot(cover.center(i)[0] - x, cover.center(i)[1] - y));
        EXPECT_LT(best, 2.0 * mu / 5.0 + mu / (5.0 * std::sqrt(2.0)));
    }
}

TEST(ProofReplay, FindsWitnessAndChecksEveryStep) {
    std::vector<double> xs;
    for (int i = 0; i < 400; ++i) xs.push_back(-0.5 + i / 400.0);
    auto replay = replay_covering_proof(line_set(xs), 1.0 / 6.0, 1);
    ASSERT_EQ(replay.steps.size(), 1u);
    EXPECT_GT(replay.witness_occupancy, 1u);
    for (const auto& s : replay.steps) {
        EXPECT_TRUE(s.diameter_annulus_occupied);
        EXPECT_GT(s.points_in_chosen_ball, s.required);
        EXPECT_LE(static_cast<double>(s.balls), vitali_count_bound(1, (1.0 / 36.0) / 2.0));
    }
}

TEST(ProofReplay, TwoLevels) {
    // 1-D, lambda = 1/4: bounds 160 and 25600 at budgets 1 and 2.
    std::vector<double> xs;
    const int n = 25601;
    for (int i = 0; i < n; ++i) xs.push_back(-0.5 + static_cast<double>(i) / n);
    auto replay = replay_covering_proof(line_set(xs), 0.25, 2);
    ASSERT_EQ(replay.steps.size(), 2u);
    EXPECT_GT(replay.witness_occupancy, 2u);
    for (const auto& s : replay.steps) EXPECT_TRUE(s.diameter_annulus_occupied);
}

TEST(ProofReplay, RequiresLargeSet) {
    EXPECT_THROW(replay_covering_proof(line_set({0.0, 0.1}), 0.125, 1), ParameterError);
}
