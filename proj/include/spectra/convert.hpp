#pragma once

#include <Eigen/Dense>

#include <vector>

#include "spectra/core.hpp"
#include "spectra/ops.hpp"

namespace spectra {

// {x : A x <= b}
struct HPolyhedron {
    Eigen::MatrixXd A;
    Eigen::VectorXd b;
};

// {x : (x - c)' Q^{-1} (x - c) <= 1}
struct Ellipsoid {
    Eigen::VectorXd c;
    Eigen::MatrixXd Q;
};

// c + G [-1, 1]^{n_g}
struct Zonotope {
    Eigen::VectorXd c;
    Eigen::MatrixXd G;
};

// c + G xi  with  ||xi_J||_p <= 1 for each index set J and A xi = b.
// Index sets are 0-based and must partition 0..n_g-1.
struct Ellipsotope {
    Rational p;
    Eigen::VectorXd c;
    Eigen::MatrixXd G;
    Eigen::MatrixXd A;  // n_c x n_g, n_c may be 0
    Eigen::VectorXd b;
    std::vector<std::vector<int>> index_sets;
};

Shadow from_hpolyhedron(const HPolyhedron& P);
Shadow from_ellipsoid(const Ellipsoid& E);
Shadow from_zonotope(const Zonotope& Z);

// {x in R^dim : ||x||_p <= 1}
Shadow from_pnorm_ball(int dim, const Rational& p);

Shadow from_ellipsotope(const Ellipsotope& E);

// Constrained zonotope: p = inf with singleton index sets.
Shadow from_constrained_zonotope(const Eigen::VectorXd& c, const Eigen::MatrixXd& G, const Eigen::MatrixXd& A,
                                 const Eigen::VectorXd& b);

} // namespace spectra
