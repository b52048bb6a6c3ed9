#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <vector>

#include "spectra/core.hpp"

namespace spectra {

struct DirectionSet {
    int dim = 0;
    std::vector<Eigen::VectorXd> vectors;  // unit length
};

// n = 2: exactly equiangular starting at angle 0.  n >= 3: seeded start
// (spiral for n = 3) relaxed by pairwise repulsion on the sphere.
DirectionSet uniform_directions(int n, int k, std::uint64_t seed = 0);

enum class ReductionStrategy { lowrank, polyhedral };

struct ReductionConfig {
    int target_size = 1;
    std::optional<std::vector<int>> per_point_sizes;  // one per boundary point, summing to target_size
    ReductionStrategy strategy = ReductionStrategy::lowrank;
    bool isotropic = false;
    std::uint64_t seed = 0;  // direction seed for the polyhedral strategy
};

// Maximizer then minimizer of each coordinate (2n points).
std::vector<Eigen::VectorXd> boundary_points(const Shadow& Sg);

// Outer spectrahedron of size target_size tangent to Sg at the boundary points.
Shadow lowrank_reduce(const Shadow& Sg, const ReductionConfig& cfg);

// Tangent H-polyhedron with k faces, as a spectrahedron.
Shadow polyhedral_approx(const Shadow& Sg, int k, std::uint64_t seed = 0);
Shadow polyhedral_approx(const Shadow& Sg, const DirectionSet& dirs);

struct IsotropicTransform {
    Eigen::MatrixXd T;  // symmetric positive definite
    Eigen::VectorXd c;  // center of the minimum parallelotope
};

IsotropicTransform isotropic_transform(const Shadow& Sg);

// Dispatches on cfg.strategy.
Shadow reduce(const Shadow& S, const ReductionConfig& cfg);

} // namespace spectra
