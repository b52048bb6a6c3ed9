#pragma once

#include <Eigen/Dense>

#include <optional>

#include "spectra/conic.hpp"
#include "spectra/core.hpp"

namespace spectra {

struct EmptinessResult {
    bool empty;
    double margin;  // eps* (+inf when the margin problem is unbounded)
    SolveReport report;
};

struct MembershipResult {
    bool member;
    double margin;
    SolveReport report;
};

struct BoundednessReport {
    enum class Branch { rankP_deficient, rank_sum_mismatch, trace_zero, sdp_test };

    bool bounded = false;
    int rank_p = 0;
    int rank_q = 0;
    int rank_pq = 0;
    std::optional<double> eps_b;
    Branch branch = Branch::sdp_test;
};

const char* to_string(BoundednessReport::Branch b);

// Acceptance threshold tol * (1 + ||Lambda||_F).
inline constexpr double kValidateTol = 1e-7;

// Bounded iff eps_b < -kBoundedTol; recession directions give eps_b = 0.
inline constexpr double kBoundedTol = 1e-6;

EmptinessResult is_empty(const Shadow& S);
MembershipResult contains_point(const Shadow& S, const Eigen::VectorXd& v);
BoundednessReport is_bounded(const Shadow& S);

// Column-stacked upper triangle, diagonal once, no scaling.
Eigen::VectorXd tvec(const SymSparse& M);

} // namespace spectra
