#include <gtest/gtest.h>

#include <sstream>

#include <json.hpp>

#include "common.hpp"

using namespace spectra;
using namespace testing_util;

TEST(Sme, ExactMeasurement)
{
    EstimationRun run{{mat(1, 1, {1}), mat(1, 1, {0}), mat(1, 1, {1}), mat(1, 1, {1}), mat(1, 1, {1})},
                      interval(-1, 1), interval(0, 0), interval(0, 0), 1, std::nullopt, 10, 0};
    Shadow X = sme_step(run.X0, vec({0.3}), vec({0}), run);
    EXPECT_NEAR(support(X, vec({1})), 0.3, 1e-5);
    EXPECT_NEAR(-support(X, vec({-1})), 0.3, 1e-5);
}

TEST(Sme, FewerSensors)
{
    EstimationRun run{{mat(2, 2, {0.9, 0.2, -0.1, 0.8}), mat(2, 1, {0, 1}), MatrixXd::Identity(2, 2),
                       mat(1, 2, {1, 0}), mat(1, 1, {1})},
                      box(), box(0.1, 0.1), interval(-0.2, 0.2), 1, std::nullopt, 10, 0};
    Shadow consistent = linear_inverse_map(translate(linear_map(run.V, -run.system.F), vec({0.5})), run.system.C);
    EXPECT_FALSE(is_bounded(consistent).bounded);
    Shadow X = sme_step(run.X0, vec({0.5}), vec({0.1}), run);
    EXPECT_TRUE(is_bounded(X).bounded);
    EXPECT_NEAR(support(X, vec({1, 0})), 0.7, 1e-5);
}

TEST(Sme, Inconsistent)
{
    EstimationRun run{{mat(1, 1, {1}), mat(1, 1, {0}), mat(1, 1, {1}), mat(1, 1, {1}), mat(1, 1, {1})},
                      interval(-1, 1), interval(0, 0), interval(-0.1, 0.1), 1, std::nullopt, 10, 0};
    try {
        sme_step(run.X0, vec({5}), vec({0}), run);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::contract);
    }
}

TEST(Sme, LongRun)
{
    EstimationRun run = random_estimation_run(2, 100, 5, 42);
    auto res = run_estimation(run);
    EXPECT_EQ(res.contained, 100);
    ASSERT_EQ(res.logs.size(), 101u);
    for (const auto& l : res.logs)
        EXPECT_EQ(l.containment_checks, l.containment_total);
}

// sme_step against the plain composition of set operations.
TEST(Sme, MatchesPlainComposition)
{
    EstimationRun run = random_estimation_run(2, 3, std::nullopt, 11);
    const LinearSystem& sys = run.system;
    Shadow X = run.X0, P = run.X0;
    const std::vector<VectorXd> ys{vec({0.3}), vec({-0.2}), vec({0.1})};
    for (int k = 0; k < 3; ++k) {
        const VectorXd u = vec({0.5 * k});
        X = sme_step(X, ys[k], u, run, false);
        P = intersect(minkowski_sum(translate(linear_map(P, sys.A), sys.B * u), linear_map(run.W, sys.L)),
                      linear_inverse_map(translate(linear_map(run.V, -sys.F), ys[k]), sys.C));
        EXPECT_EQ(X.m(), P.m());
        EXPECT_EQ(X.size(), P.size());
        for (const auto& a : circle_dirs(12))
            EXPECT_NEAR(support(X, a), support(P, a), 1e-5 * (1 + std::abs(support(P, a))));
    }
}

// Dynamics with an eigenvalue near zero; without reduction the estimate
// composes forty inverse maps.
TEST(Sme, NearlySingularDynamics)
{
    EstimationRun run = random_estimation_run(2, 40, std::nullopt, 507);
    EXPECT_LT(run.system.A.eigenvalues().cwiseAbs().minCoeff(), 0.05);
    EXPECT_EQ(run_estimation(run).contained, 40);
}

TEST(Reach, Identity)
{
    Shadow X = disk(0.5, 0);
    Shadow R = reach_step(X, interval(-1, 1), MatrixXd::Identity(2, 2), MatrixXd::Zero(2, 1));
    for (const auto& a : circle_dirs(8))
        EXPECT_NEAR(support(R, a), support(X, a), 1e-5);
}

TEST(Reach, ZeroDynamics)
{
    const MatrixXd B = mat(2, 1, {1, 2});
    Shadow R = reach_step(disk(), interval(-1, 1), MatrixXd::Zero(2, 2), B);
    EXPECT_TRUE(member(R, vec({0.5, 1})));
    EXPECT_FALSE(member(R, vec({0.5, 1.1})));
}

TEST(Reach, Trajectories)
{
    ReachRun run{mat(2, 2, {0.95, 0.2, -0.2, 0.9}), mat(2, 1, {0, 1}), vec({1, 0}), vec({0.1}),
                 {mat(2, 2, {0.2, 0, 0, 0.1})}, {mat(1, 1, {0.04})}, Rational::parse("2"), Rational::parse("2"), 10};
    auto res = run_reach(run, 500, 3);
    ASSERT_EQ(res.sets.size(), 11u);
    for (const auto& l : res.logs) {
        if (l.k == 0)
            continue;
        EXPECT_EQ(l.containment_total, 500);
        EXPECT_EQ(l.containment_checks, 500) << l.k;
    }
}

TEST(LpInitial, SingleEllipsoid)
{
    ReachRun run{MatrixXd::Identity(2, 2), mat(2, 1, {0, 1}), vec({1, 2}), vec({0}),
                 {mat(2, 2, {4, 0, 0, 1})}, {mat(1, 1, {1})}, Rational::parse("3"), Rational::parse("1"), 1};
    auto s = build_lp_initial_sets(run);
    for (const auto& a : circle_dirs(8))
        EXPECT_NEAR(support(s.X0, a), a.dot(vec({1, 2})) + std::sqrt(4 * a(0) * a(0) + a(1) * a(1)), 1e-6);
}

TEST(LpInitial, TwoDisks)
{
    const MatrixXd I = MatrixXd::Identity(2, 2);
    ReachRun run{I, mat(2, 1, {0, 1}), vec({0, 0}), vec({0}), {I, I}, {mat(1, 1, {1})}, Rational::parse("1"),
                 Rational::parse("1"), 1};
    auto one = build_lp_initial_sets(run);
    run.p1 = Rational::inf();
    auto inf = build_lp_initial_sets(run);
    for (const auto& a : circle_dirs(8)) {
        EXPECT_NEAR(support(one.X0, a), 2, 1e-5);
        EXPECT_NEAR(support(inf.X0, a), 1, 1e-5);
    }
}

TEST(LpSample, MaximizerMatchesSupport)
{
    const std::vector<MatrixXd> shapes{mat(2, 2, {1, 0.2, 0.2, 0.5}), mat(2, 2, {0.3, 0, 0, 0.8})};
    const Rational p = Rational::parse("3");
    Shadow S = lp_sum(from_ellipsoid({vec({0, 0}), shapes[0]}), from_ellipsoid({vec({0, 0}), shapes[1]}), p);
    std::mt19937_64 rng(1);
    for (const auto& a : circle_dirs(8)) {
        VectorXd x = lp_sum_maximizer(shapes, p, a);
        EXPECT_NEAR(a.dot(x), support(S, a), 1e-5);
        EXPECT_TRUE(member(S, sample_lp_sum(shapes, p, rng)));
    }
}

TEST(Volume, Disk)
{
    auto v = estimate_volume(disk(), 256);
    EXPECT_NEAR(v.value, std::numbers::pi, 0.01 * std::numbers::pi);
    EXPECT_FALSE(v.degenerate);
    EXPECT_LT(v.error, 0.01 * std::numbers::pi);
}

TEST(Volume, Square)
{
    auto v = estimate_volume(box(), 64);
    EXPECT_NEAR(v.value, 4, 0.04);
}

TEST(Volume, Segment)
{
    auto v = estimate_volume(from_zonotope({vec({0, 0}), mat(2, 1, {1, 1})}), 32);
    EXPECT_LE(v.value, 1e-3);
    EXPECT_TRUE(v.degenerate);
}

TEST(Volume, Cube)
{
    Shadow cube = from_zonotope({VectorXd::Zero(3), MatrixXd::Identity(3, 3)});
    auto v = estimate_volume(cube, 20, 1, 2000);
    EXPECT_NEAR(v.value, 8, 3 * v.error + 0.2);
}

TEST(Volume, Unbounded)
{
    EXPECT_THROW(estimate_volume(parabola(), 16), Error);
}

TEST(RandomSystem, Deterministic)
{
    auto a = random_system(3, 77), b = random_system(3, 77);
    EXPECT_EQ(a.A, b.A);
    EXPECT_EQ(a.C, b.C);
    EXPECT_EQ(a.F, b.F);
}

TEST(RandomSystem, SpectralRadius)
{
    for (int s = 0; s < 100; ++s) {
        auto sys = random_system(2, s);
        EXPECT_LE(sys.A.eigenvalues().cwiseAbs().maxCoeff(), 1.05 + 1e-12);
        EXPECT_EQ(Eigen::FullPivLU<MatrixXd>(sys.C).rank(), 1);
    }
}

TEST(RandomSystem, Shapes)
{
    auto sys = random_system(5, 1);
    EXPECT_EQ(sys.A.rows(), 5);
    EXPECT_EQ(sys.A.cols(), 5);
    EXPECT_EQ(sys.B.rows(), 5);
    EXPECT_EQ(sys.L.rows(), 5);
    EXPECT_EQ(sys.C.cols(), 5);
    EXPECT_EQ(sys.F.rows(), sys.C.rows());
}

TEST(Plot, Disk)
{
    auto pts = emit_plot_data(disk(), 8);
    ASSERT_EQ(pts.size(), 8u);
    const auto dirs = uniform_directions(2, 8).vectors;
    for (int i = 0; i < 8; ++i)
        EXPECT_LT((pts[i] - Eigen::Vector2d(dirs[i])).norm(), 1e-5);
}

TEST(Plot, Square)
{
    auto pts = emit_plot_data(box(), 4);
    EXPECT_NEAR(pts[0].x(), 1, 1e-6);
    EXPECT_NEAR(pts[1].y(), 1, 1e-6);
    EXPECT_NEAR(pts[2].x(), -1, 1e-6);
    EXPECT_NEAR(pts[3].y(), -1, 1e-6);
}

TEST(Plot, Translated)
{
    for (const auto& p : emit_plot_data(translate(disk(), vec({5, 5})), 12))
        EXPECT_LE((p - Eigen::Vector2d(5, 5)).norm(), 1 + 1e-6);
}

TEST(Plot, Csv)
{
    std::ostringstream os;
    write_plot_csv(os, {Eigen::Vector2d(1, 0.5)});
    EXPECT_EQ(os.str(), "x,y\n1,0.5\n");
}

TEST(Log, Jsonl)
{
    std::ostringstream os;
    StepLog l;
    l.k = 3;
    l.set_bytes = 120;
    l.volume_estimate = 2.5;
    write_jsonl(os, l);
    auto j = nlohmann::json::parse(os.str());
    EXPECT_EQ(j["k"], 3);
    EXPECT_EQ(j["set_bytes"], 120);
    EXPECT_EQ(j["volume_estimate"], 2.5);
    EXPECT_EQ(os.str().back(), '\n');
}
