#include <gtest/gtest.h>

#include "common.hpp"

using namespace spectra;
using namespace testing_util;

namespace {

std::vector<VectorXd> members(const Shadow& S, int count, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    double lo[2], hi[2];
    for (int i = 0; i < 2; ++i) {
        VectorXd e = VectorXd::Unit(2, i);
        hi[i] = support(S, e);
        lo[i] = -support(S, -e);
    }
    std::vector<VectorXd> out;
    std::uniform_real_distribution<double> u(0, 1);
    while (static_cast<int>(out.size()) < count) {
        VectorXd x = vec({lo[0] + (hi[0] - lo[0]) * u(rng), lo[1] + (hi[1] - lo[1]) * u(rng)});
        if (eval_membership_fast(S, x, VectorXd()))
            out.push_back(x);
    }
    return out;
}

} // namespace

TEST(Directions, Plane)
{
    auto d = uniform_directions(2, 4);
    ASSERT_EQ(d.vectors.size(), 4u);
    EXPECT_LT((d.vectors[0] - vec({1, 0})).norm(), 1e-12);
    EXPECT_LT((d.vectors[1] - vec({0, 1})).norm(), 1e-12);
    EXPECT_LT((d.vectors[2] - vec({-1, 0})).norm(), 1e-12);

    auto e = uniform_directions(2, 8);
    for (int i = 0; i < 8; ++i) {
        const double c = e.vectors[i].dot(e.vectors[(i + 1) % 8]);
        EXPECT_NEAR(std::acos(std::clamp(c, -1.0, 1.0)), std::numbers::pi / 4, 1e-12);
    }
}

TEST(Directions, Space)
{
    for (std::uint64_t seed : {0u, 1u, 17u}) {
        auto d = uniform_directions(3, 6, seed);
        double min_angle = 10;
        for (std::size_t i = 0; i < d.vectors.size(); ++i) {
            EXPECT_NEAR(d.vectors[i].norm(), 1, 1e-12);
            for (std::size_t j = 0; j < i; ++j)
                min_angle = std::min(min_angle, std::acos(std::clamp(d.vectors[i].dot(d.vectors[j]), -1.0, 1.0)));
        }
        EXPECT_GE(min_angle * 180 / std::numbers::pi, 40);
    }
    auto a = uniform_directions(4, 12, 5), b = uniform_directions(4, 12, 5);
    for (int i = 0; i < 12; ++i) {
        EXPECT_EQ(a.vectors[i], b.vectors[i]);
        EXPECT_NEAR(a.vectors[i].norm(), 1, 1e-12);
    }
}

TEST(BoundaryPoints, Square)
{
    auto pts = boundary_points(box());
    ASSERT_EQ(pts.size(), 4u);
    EXPECT_NEAR(pts[0](0), 1, 1e-6);
    EXPECT_NEAR(pts[1](0), -1, 1e-6);
    EXPECT_NEAR(pts[2](1), 1, 1e-6);
    EXPECT_NEAR(pts[3](1), -1, 1e-6);
}

TEST(BoundaryPoints, Ellipse)
{
    auto pts = boundary_points(from_ellipsoid({vec({0, 0}), mat(2, 2, {4, 0, 0, 1})}));
    EXPECT_LT((pts[0] - vec({2, 0})).norm(), 1e-4);
    EXPECT_LT((pts[1] - vec({-2, 0})).norm(), 1e-4);
    EXPECT_LT((pts[2] - vec({0, 1})).norm(), 1e-4);
    EXPECT_LT((pts[3] - vec({0, -1})).norm(), 1e-4);
}

TEST(BoundaryPoints, Rejects)
{
    EXPECT_THROW(boundary_points(minkowski_sum(disk(), box())), Error);
    EXPECT_THROW(boundary_points(from_hpolyhedron({mat(2, 2, {1, 0, 0, 1}), vec({1, 1})})), Error);
}

TEST(LowRank, FullSizeIsExact)
{
    const Shadow S = random_spectrahedron(2, 6, 3);
    ReductionConfig cfg;
    cfg.target_size = 6;
    cfg.per_point_sizes = std::vector<int>{6, 0, 0, 0};
    Shadow R = lowrank_reduce(S, cfg);
    EXPECT_EQ(R.size(), 6);
    for (const auto& a : circle_dirs(12))
        EXPECT_NEAR(support(R, a), support(S, a), 1e-5);
}

TEST(LowRank, SizeOneIsTangentHalfspace)
{
    const Shadow S = random_spectrahedron(2, 6, 4);
    ReductionConfig cfg;
    cfg.target_size = 1;
    cfg.per_point_sizes = std::vector<int>{1, 0, 0, 0};
    Shadow R = lowrank_reduce(S, cfg);
    ASSERT_EQ(R.size(), 1);
    const VectorXd x1 = boundary_points(S)[0];
    EXPECT_TRUE(member(R, x1));
    // R = {x : l + a'x >= 0}, outward normal -a
    const auto& g = R.blocks()[0];
    VectorXd a(2);
    for (int i = 0; i < 2; ++i)
        a(i) = g.a[i].trace();
    const VectorXd nrm = -a.normalized();
    EXPECT_LT((nrm - vec({1, 0})).norm(), 1e-3);
    EXPECT_NEAR(support(R, nrm), support(S, nrm), 1e-5);
}

TEST(LowRank, OuterApproximation)
{
    const Shadow S = random_spectrahedron(2, 20, 9);
    ReductionConfig cfg;
    cfg.target_size = 12;
    Shadow R = lowrank_reduce(S, cfg);
    EXPECT_EQ(R.size(), 12);
    EXPECT_EQ(R.blocks().size(), 4u);
    for (const auto& x : members(S, 400, 1))
        EXPECT_TRUE(eval_membership_fast(R, x, VectorXd(), 1e-6)) << x.transpose();
    EXPECT_GE(estimate_volume(R, 64).value, estimate_volume(S, 64).value * (1 - 1e-3));
}

TEST(LowRank, Isotropic)
{
    const Shadow S = linear_map(random_spectrahedron(2, 10, 2), mat(2, 2, {3, 0.5, 0, 0.4}));
    ReductionConfig cfg;
    cfg.target_size = 4;
    cfg.isotropic = true;
    Shadow R = lowrank_reduce(S, cfg);
    for (const auto& x : members(S, 200, 2))
        EXPECT_TRUE(eval_membership_fast(R, x, VectorXd(), 1e-6));
}

TEST(LowRank, Contracts)
{
    ReductionConfig cfg;
    cfg.target_size = 10;
    cfg.per_point_sizes = std::vector<int>{10, 0, 0, 0};
    EXPECT_THROW(lowrank_reduce(disk(), cfg), Error);  // 10 > 3
    cfg.per_point_sizes = std::vector<int>{1, 1, 1};
    EXPECT_THROW(lowrank_reduce(disk(), cfg), Error);
    cfg.per_point_sizes.reset();
    try {
        lowrank_reduce(minkowski_sum(disk(), box()), cfg);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::contract);
    }
}

TEST(Polyhedral, DiskSquare)
{
    Shadow P = polyhedral_approx(disk(), 4);
    EXPECT_EQ(P.size(), 4);
    EXPECT_TRUE(member(P, vec({1, 1})));
    EXPECT_FALSE(member(P, vec({1.02, 0})));
}

TEST(Polyhedral, Octagon)
{
    Shadow P = polyhedral_approx(disk(), 8);
    const auto dirs = uniform_directions(2, 8).vectors;
    for (int i = 0; i < 8; ++i) {
        EXPECT_NEAR(P.blocks()[0].lambda.dense()(i, i), 1, 1e-6);
        EXPECT_NEAR(support(P, dirs[i]), 1, 1e-6);
    }
}

TEST(Polyhedral, Shadow)
{
    const Shadow S = minkowski_sum(disk(0.2, 0, 0.5), from_zonotope({vec({0, 0}), mat(2, 2, {0.5, 0.2, 0, 0.4})}));
    const auto dirs = uniform_directions(2, 12, 0);
    Shadow P = polyhedral_approx(S, dirs);
    EXPECT_EQ(P.m(), 0);
    for (const auto& a : dirs.vectors)
        EXPECT_NEAR(support(P, a), support(S, a), 1e-6);
    for (const auto& a : circle_dirs(32, 0.05))
        EXPECT_GE(support(P, a), support(S, a) - 1e-6);
}

TEST(Polyhedral, Unbounded)
{
    try {
        polyhedral_approx(parabola(), 6);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::contract);
    }
}

TEST(Isotropic, Square)
{
    auto t = isotropic_transform(box());
    EXPECT_LT((t.T - MatrixXd::Identity(2, 2)).norm(), 1e-4);
    EXPECT_LT(t.c.norm(), 1e-4);
}

TEST(Isotropic, Ellipse)
{
    auto t = isotropic_transform(from_ellipsoid({vec({0, 0}), mat(2, 2, {4, 0, 0, 1})}));
    MatrixXd A = t.T.cwiseAbs();
    const bool straight = (A - mat(2, 2, {0.5, 0, 0, 1})).norm() < 1e-3;
    const bool swapped = (A - mat(2, 2, {0, 0.5, 1, 0})).norm() < 1e-3;
    EXPECT_TRUE(straight || swapped) << t.T;
}

// The image of the transform fits the cube [-1, 1]^n + c' tightly on every
// face, and a second pass cannot do worse than that cube.
TEST(Isotropic, ImageFitsCube)
{
    const Shadow S = linear_map(random_spectrahedron(2, 8, 6), mat(2, 2, {2, 1, 0, 0.5}));
    auto t = isotropic_transform(S);
    const Shadow img = linear_map(S, t.T);
    for (int i = 0; i < 2; ++i) {
        const VectorXd e = VectorXd::Unit(2, i);
        EXPECT_NEAR(support(img, e) + support(img, -e), 2, 1e-4);
    }
    auto again = isotropic_transform(img);
    EXPECT_GE(again.T.determinant(), 1 - 1e-5);
}

TEST(Reduce, Dispatch)
{
    ReductionConfig cfg;
    cfg.target_size = 6;
    cfg.strategy = ReductionStrategy::polyhedral;
    Shadow P = reduce(disk(), cfg);
    EXPECT_EQ(P.size(), 6);
    cfg.strategy = ReductionStrategy::lowrank;
    cfg.target_size = 4;
    EXPECT_EQ(reduce(random_spectrahedron(2, 8, 1), cfg).size(), 4);
}
