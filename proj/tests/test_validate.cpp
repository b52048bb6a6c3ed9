#include <gtest/gtest.h>

#include "common.hpp"

using namespace spectra;
using namespace testing_util;

TEST(Empty, ConstantNegative)
{
    BlockGroup g;
    g.size = 1;
    g.lambda = SymSparse::diagonal({-1});
    g.a = {SymSparse(1)};
    auto r = is_empty(Shadow(1, 0, {g}));
    EXPECT_TRUE(r.empty);
    EXPECT_NEAR(r.margin, -1, 1e-6);
}

TEST(Empty, Interval)
{
    auto r = is_empty(unit_interval());
    EXPECT_FALSE(r.empty);
    EXPECT_NEAR(r.margin, 1, 1e-6);
}

TEST(Empty, DisjointIntervals)
{
    EXPECT_TRUE(is_empty(intersect(interval(0, 1), interval(2, 3))).empty);
    EXPECT_FALSE(is_empty(intersect(interval(0, 1), interval(1, 3))).empty);
}

TEST(Member, Examples)
{
    auto r = contains_point(disk(), vec({0, 0}));
    EXPECT_TRUE(r.member);
    EXPECT_NEAR(r.margin, 1, 1e-6);
    EXPECT_FALSE(member(parabola(), vec({1, -0.5})));
    EXPECT_TRUE(member(parabola(), vec({0, -1})));
}

TEST(Member, WrongLength)
{
    EXPECT_THROW(contains_point(disk(), vec({0})), Error);
}

TEST(Bounded, Examples)
{
    EXPECT_TRUE(is_bounded(from_zonotope({vec({0, 0}), MatrixXd::Identity(2, 2)})).bounded);

    auto p = is_bounded(parabola());
    EXPECT_FALSE(p.bounded);

    BlockGroup g;
    g.size = 1;
    g.lambda = SymSparse(1);
    g.a = {SymSparse::diagonal({1})};
    auto h = is_bounded(Shadow(1, 0, {g}));
    EXPECT_FALSE(h.bounded);
    EXPECT_EQ(h.branch, BoundednessReport::Branch::sdp_test);
    ASSERT_TRUE(h.eps_b.has_value());
    EXPECT_NEAR(*h.eps_b, 1, 1e-5);
}

TEST(Bounded, Branches)
{
    // x2 never appears: rank(P) < n
    Shadow strip = from_hpolyhedron({mat(2, 2, {1, 0, -1, 0}), vec({1, 1})});
    auto r = is_bounded(strip);
    EXPECT_FALSE(r.bounded);
    EXPECT_EQ(r.branch, BoundednessReport::Branch::rankP_deficient);
    EXPECT_EQ(r.rank_p, 1);

    // lifted variable free in the direction of x: {x : exists y, |x - y| <= 1}
    BlockGroup g;
    g.size = 2;
    g.lambda = SymSparse::diagonal({1, 1});
    g.a = {SymSparse::diagonal({-1, 1})};
    g.b = {SymSparse::diagonal({1, -1})};
    auto line = is_bounded(Shadow(1, 1, {g}));
    EXPECT_FALSE(line.bounded);
    EXPECT_EQ(line.branch, BoundednessReport::Branch::rank_sum_mismatch);

    // the disk pencil has traceless A matrices
    auto d = is_bounded(disk());
    EXPECT_TRUE(d.bounded);
    EXPECT_EQ(d.branch, BoundednessReport::Branch::trace_zero);
    EXPECT_EQ(d.rank_p, 2);

    auto b = is_bounded(box());
    EXPECT_TRUE(b.bounded);
}

TEST(Bounded, RequiresNonempty)
{
    try {
        is_bounded(intersect(interval(0, 1), interval(2, 3)));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::contract);
    }
}

TEST(Tvec, ColumnStacked)
{
    SymSparse M(3, {{0, 0, 1}, {0, 1, 2}, {1, 1, 3}, {0, 2, 4}, {2, 2, 6}});
    VectorXd t = tvec(M);
    ASSERT_EQ(t.size(), 6);
    EXPECT_EQ(t, vec({1, 2, 3, 4, 0, 6}));
}

TEST(Property, SelfIntersectionNonempty)
{
    std::mt19937_64 rng(4);
    for (int t = 0; t < 10; ++t) {
        Shadow S = random_set(rng);
        EXPECT_FALSE(is_empty(intersect(S, translate(S, vec({0, 0})))).empty);
    }
}

TEST(Property, BoundedUnderInvertibleMap)
{
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> u(-1, 1);
    for (int t = 0; t < 8; ++t) {
        MatrixXd T = mat(2, 2, {1 + u(rng), u(rng), u(rng), 1 + u(rng)});
        if (std::abs(T.determinant()) < 0.2)
            continue;
        Shadow S = random_set(rng);
        EXPECT_TRUE(is_bounded(S).bounded);
        EXPECT_TRUE(is_bounded(linear_map(S, T)).bounded);
        Shadow H = from_hpolyhedron({mat(1, 2, {u(rng), 1}), vec({0.5})});
        EXPECT_FALSE(is_bounded(H).bounded);
        EXPECT_FALSE(is_bounded(linear_map(H, T)).bounded);
    }
}

TEST(Property, ConversionsBounded)
{
    EXPECT_TRUE(is_bounded(from_ellipsoid({vec({1, 2}), mat(2, 2, {2, 0.5, 0.5, 1})})).bounded);
    EXPECT_TRUE(is_bounded(from_zonotope({vec({0, 1}), mat(2, 3, {1, 0, 1, 0, 1, -1})})).bounded);
    EXPECT_TRUE(is_bounded(from_pnorm_ball(3, Rational::parse("3/2"))).bounded);
    EXPECT_FALSE(is_bounded(from_hpolyhedron({mat(1, 2, {1, 0}), vec({1})})).bounded);
    EXPECT_FALSE(is_bounded(linear_inverse_map(disk(), mat(2, 3, {1, 0, 0, 0, 1, 0}))).bounded);
}

namespace {

// Sets with a closed-form membership margin (positive inside, negative outside).
struct Oracle {
    Shadow set;
    std::function<double(const VectorXd&)> margin;
};

Oracle random_oracle(std::mt19937_64& rng)
{
    std::uniform_real_distribution<double> u(-1, 1);
    if (std::uniform_int_distribution<int>(0, 1)(rng) == 0) {
        // T (disk(c, r) intersected with a halfplane)
        const VectorXd c = 0.3 * vec({u(rng), u(rng)});
        const double r = 0.8 + 0.3 * u(rng);
        const VectorXd a = vec({u(rng), u(rng)}).normalized();
        const double b = 0.2 + 0.2 * u(rng);
        MatrixXd T = mat(2, 2, {1 + 0.4 * u(rng), 0.4 * u(rng), 0.4 * u(rng), 1 + 0.4 * u(rng)});
        Shadow S = intersect(disk(c(0), c(1), r), from_hpolyhedron({a.transpose(), vec({b})}));
        MatrixXd Ti = T.inverse();
        return {linear_map(S, T), [=](const VectorXd& x) {
                    VectorXd z = Ti * x;
                    return std::min(r - (z - c).norm(), b - a.dot(z));
                }};
    }
    // disk of radius r plus the segment [p, q]
    const double r = 0.3 + 0.2 * std::abs(u(rng));
    const VectorXd p = 0.8 * vec({u(rng), u(rng)}), q = 0.8 * vec({u(rng), u(rng)});
    Shadow seg = from_zonotope({(p + q) / 2, (q - p) / 2});
    return {minkowski_sum(disk(0, 0, r), seg), [=](const VectorXd& x) {
                const VectorXd d = q - p;
                const double t = std::clamp((x - p).dot(d) / d.squaredNorm(), 0.0, 1.0);
                return r - (x - p - t * d).norm();
            }};
}

} // namespace

TEST(Property, GridAgreement)
{
    std::mt19937_64 rng(21);
    int checked = 0;
    for (int t = 0; t < 30; ++t) {
        Oracle o = random_oracle(rng);
        for (int i = 0; i < 21; ++i)
            for (int j = 0; j < 21; ++j) {
                const VectorXd x = vec({-1.6 + 0.16 * i, -1.6 + 0.16 * j});
                const double g = o.margin(x);
                if (std::abs(g) < 1e-4)
                    continue;
                ++checked;
                EXPECT_EQ(member(o.set, x), g > 0) << "set " << t << " at " << x.transpose() << " margin " << g;
            }
    }
    EXPECT_GT(checked, 12000);
}
