#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <numbers>
#include <random>
#include <vector>

#include "spectra/spectra.hpp"

namespace testing_util {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using spectra::Shadow;
using spectra::SymSparse;

inline VectorXd vec(std::initializer_list<double> v)
{
    VectorXd out(v.size());
    int i = 0;
    for (double x : v)
        out(i++) = x;
    return out;
}

inline MatrixXd mat(int r, int c, std::initializer_list<double> v)
{
    MatrixXd out(r, c);
    auto it = v.begin();
    for (int i = 0; i < r; ++i)
        for (int j = 0; j < c; ++j)
            out(i, j) = *it++;
    return out;
}

// <diag(1,1), {diag(-1,1)}>
inline Shadow unit_interval()
{
    spectra::BlockGroup g;
    g.size = 2;
    g.lambda = SymSparse::diagonal({1, 1});
    g.a = {SymSparse::diagonal({-1, 1})};
    return Shadow(1, 0, {g});
}

// lo <= x <= hi in R^1
inline Shadow interval(double lo, double hi)
{
    return spectra::from_hpolyhedron({mat(2, 1, {1, -1}), vec({hi, -lo})});
}

// Lambda = I2, A1 = 1.2 (ones - I), A2 = diag(1, 0)
inline Shadow parabola()
{
    spectra::BlockGroup g;
    g.size = 2;
    g.lambda = SymSparse::identity(2);
    g.a = {SymSparse(2, {{0, 1, 1.2}}), SymSparse::diagonal({1, 0})};
    return Shadow(2, 0, {g});
}

inline Shadow disk(double cx = 0, double cy = 0, double r = 1)
{
    return spectra::from_ellipsoid({vec({cx, cy}), r * r * MatrixXd::Identity(2, 2)});
}

inline Shadow box(double a = 1, double b = 1)
{
    return spectra::from_hpolyhedron({mat(4, 2, {1, 0, -1, 0, 0, 1, 0, -1}), vec({a, a, b, b})});
}

inline std::vector<VectorXd> circle_dirs(int k, double offset = 0.1)
{
    std::vector<VectorXd> out;
    for (int i = 0; i < k; ++i) {
        const double t = offset + 2 * std::numbers::pi * i / k;
        out.push_back(vec({std::cos(t), std::sin(t)}));
    }
    return out;
}

inline double support(const Shadow& S, const VectorXd& a)
{
    auto r = spectra::solve_support(S, a);
    return r.ok() ? r.optimum : std::nan("");
}

inline bool member(const Shadow& S, const VectorXd& x)
{
    return spectra::contains_point(S, x).member;
}

// Random bounded 2-D set built from classical pieces; each contains 0.
inline Shadow random_set(std::mt19937_64& rng)
{
    std::uniform_real_distribution<double> u(-1, 1);
    std::uniform_int_distribution<int> kind(0, 2);
    const VectorXd c = 0.3 * vec({u(rng), u(rng)});
    switch (kind(rng)) {
    case 0: {
        MatrixXd M = mat(2, 2, {u(rng), u(rng), u(rng), u(rng)});
        MatrixXd Q = M * M.transpose() + 0.3 * MatrixXd::Identity(2, 2);
        return spectra::from_ellipsoid({c, Q});
    }
    case 1: {
        MatrixXd G(2, 3);
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 3; ++j)
                G(i, j) = 0.6 * u(rng);
        G(0, 0) += 0.5;
        G(1, 1) += 0.5;
        return spectra::from_zonotope({0.2 * c, G});
    }
    default: {
        const int k = 5;
        MatrixXd A(k, 2);
        VectorXd b(k);
        for (int i = 0; i < k; ++i) {
            const double t = 2 * std::numbers::pi * (i + 0.3 * u(rng)) / k;
            A.row(i) << std::cos(t), std::sin(t);
            b(i) = 0.6 + 0.4 * std::abs(u(rng));
        }
        return spectra::from_hpolyhedron({A, b});
    }
    }
}

} // namespace testing_util
