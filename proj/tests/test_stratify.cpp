#include <gtest/gtest.h>

#include <cmath>

#include "csing/shapes.hpp"
#include "csing/stratify.hpp"
#include "support.hpp"

using namespace csing;

namespace {

Cluster exact_y() {
    std::vector<double> w{1, 1, 1};
    return shapes::three_sector_disk(1.0, w, 0.05);
}

} // namespace

TEST(Graph, DoubleBubbleHasTwoVerticesThreeEdges) {
    auto g = extract_graph(testsupport::double_bubble().cluster);
    EXPECT_EQ(g.vertices.size(), 2u);
    EXPECT_EQ(g.edges.size(), 3u);
    EXPECT_TRUE(g.loops.empty());
    for (std::size_t v = 0; v < 2; ++v) EXPECT_EQ(g.degree(v), 3u);
}

TEST(Graph, SingleDiskIsOneLoop) {
    auto g = extract_graph(shapes::polygon_disk({0, 0}, 1.0, 64));
    EXPECT_TRUE(g.vertices.empty());
    EXPECT_EQ(g.loops.size(), 1u);
}

TEST(Graph, TripleBubbleHasFourJunctions) {
    auto g = extract_graph(testsupport::triple_bubble().cluster);
    EXPECT_EQ(g.vertices.size(), 4u);
    EXPECT_EQ(g.edges.size(), 6u);
}

TEST(KindFor, Windows) {
    EXPECT_EQ(kind_for(1.5, true, 3), PointKind::TripleJunction);
    EXPECT_EQ(kind_for(1.5, true, 2), PointKind::Unknown);
    EXPECT_EQ(kind_for(1.0, true, 2), PointKind::RegularSuspect);
    EXPECT_EQ(kind_for(1.5, false, 3), PointKind::Unknown);
    EXPECT_EQ(kind_for(1.2, true, 3), PointKind::Unknown);
    EXPECT_STREQ(to_string(PointKind::TripleJunction), "triple_junction");
}

TEST(Constants, ConeDensities) {
    EXPECT_EQ(reference_density(ConeType::HalfSpace), 1.0);
    EXPECT_EQ(reference_density(ConeType::Y2D), 1.5);
    EXPECT_NEAR(reference_density(ConeType::YCone3D), 1.5, 1e-15);
    // Six flat sectors of opening acos(-1/3), each of area theta/2 in the unit ball.
    EXPECT_NEAR(reference_density(ConeType::TCone3D), 6.0 * 0.5 * std::acos(-1.0 / 3.0) / kPi, 1e-12);
}

TEST(Constants, NumericTConeConverges) {
    const double exact = 3.0 * std::acos(-1.0 / 3.0) / kPi;
    EXPECT_NEAR(tcone_density_numeric(256), exact, 1e-6);
    EXPECT_NEAR(tcone_density_numeric(2048), exact, 1e-9);
}

TEST(Classify, DoubleBubbleHasTwoTripleJunctions) {
    auto c = testsupport::with_curvature_lambda(testsupport::double_bubble());
    auto rep = classify(c, extract_graph(c));
    EXPECT_EQ(rep.count, 2);
    ASSERT_EQ(rep.points.size(), 2u);
    for (const auto& p : rep.points) {
        EXPECT_EQ(p.kind, PointKind::TripleJunction);
        EXPECT_NEAR(p.density, 1.5, 0.02);
        EXPECT_GE(p.budget.budget, 1);
    }
    EXPECT_TRUE(rep.certificate_bound.admits(static_cast<std::uint64_t>(rep.count)));
    EXPECT_EQ(rep.certificate_bound.to_string(), covering::covering_bound(2, 0.125, rep.max_budget).to_string());
}

TEST(Classify, TripleBubbleHasFourTripleJunctions) {
    auto c = testsupport::with_curvature_lambda(testsupport::triple_bubble());
    auto rep = classify(c, extract_graph(c));
    EXPECT_EQ(rep.count, 4);
}

TEST(Classify, DiskHasNoSingularPoints) {
    auto c = shapes::polygon_disk({0, 0}, 1.0, 256);
    auto rep = classify(c, extract_graph(c));
    EXPECT_EQ(rep.count, 0);
    EXPECT_TRUE(rep.points.empty());
    EXPECT_EQ(rep.certificate_bound.value, 1u);
}

TEST(Classify, ExactYCentreIsTripleJunction) {
    auto c = exact_y();
    auto g = extract_graph(c);
    auto rep = classify(c, g);
    bool centre = false;
    for (const auto& p : rep.points)
        if (norm(p.location) < 1e-12) {
            centre = true;
            EXPECT_NEAR(p.density, 1.5, 1e-9);
            EXPECT_EQ(p.kind, PointKind::TripleJunction);
        }
    EXPECT_TRUE(centre);
}

TEST(Classify, RegularPointsAreRegularSuspects) {
    auto c = testsupport::with_curvature_lambda(testsupport::double_bubble());
    ClassifyOptions opt;
    for (auto x : regular_sample_points(c, 8)) {
        auto sp = analyze_point(c, x, 2, 0.05, 2.0, opt);
        EXPECT_EQ(sp.kind, PointKind::RegularSuspect);
        EXPECT_NEAR(sp.density, 1.0, 0.02);
    }
}

TEST(Classify, RejectsBadScaleRatio) {
    auto c = exact_y();
    ClassifyOptions opt;
    opt.scale_ratio = 0.2;
    EXPECT_THROW(classify(c, extract_graph(c), opt), ParameterError);
}

TEST(Classify, LimitedR0ShrinksBaseRadius) {
    auto c = testsupport::with_curvature_lambda(testsupport::double_bubble());
    auto limited = testsupport::with_lambda(c, c.lambda());
    limited = Cluster(c.chambers(), c.interfaces(), c.lambda(), 2.0);
    auto rep = classify(limited, extract_graph(limited));
    EXPECT_LE(rep.base_radius, 1.0);
}

TEST(CanonicalClass, InvariantUnderRelabelingAndMotion) {
    const auto& c = testsupport::double_bubble().cluster;
    auto base = canonical_class(extract_graph(c));
    // Swap chamber labels 1 and 2 and reverse interface order.
    std::vector<Interface> fs(c.interfaces().rbegin(), c.interfaces().rend());
    for (auto& f : fs) {
        auto swap = [](int l) { return l == 1 ? 2 : l == 2 ? 1 : l; };
        f.left = swap(f.left);
        f.right = swap(f.right);
    }
    Cluster relabeled(c.chambers(), fs);
    EXPECT_EQ(canonical_class(extract_graph(relabeled)), base);
    auto moved = transformed(c, [](Vec2 p) { return Vec2{-p.y + 4.0, p.x}; });
    EXPECT_EQ(canonical_class(extract_graph(moved)), base);
}

TEST(CanonicalClass, DistinguishesTopologies) {
    auto db = canonical_class(extract_graph(testsupport::double_bubble().cluster));
    auto tb = canonical_class(extract_graph(testsupport::triple_bubble().cluster));
    auto disk = canonical_class(extract_graph(shapes::polygon_disk({0, 0}, 1.0, 32)));
    std::vector<double> areas{1.0, 1.0};
    auto rects = canonical_class(extract_graph(shapes::adjacent_rectangles(areas, 1.0, 0.25)));
    EXPECT_NE(db, tb);
    EXPECT_NE(db, disk);
    EXPECT_NE(tb, disk);
    // Two rectangles have the same combinatorics as the double bubble.
    EXPECT_EQ(db, rects);
    EXPECT_EQ(db.find(','), std::string::npos);
}

TEST(CanonicalClass, UnequalDoubleBubbleMatchesEqual) {
    std::vector<double> areas{1.0, 1.8};
    OptimizerConfig cfg;
    cfg.target_volumes = areas;
    auto r = minimize(shapes::initial_guess(areas, 0.05), cfg);
    EXPECT_EQ(canonical_class(extract_graph(r.cluster)), canonical_class(extract_graph(testsupport::double_bubble().cluster)));
}
