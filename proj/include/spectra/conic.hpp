#pragma once

#include <Eigen/Dense>

#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "spectra/core.hpp"

namespace spectra {

enum class SolveStatus { optimal, infeasible, unbounded, numerical_failure };
const char* to_string(SolveStatus s);

enum class Sense { minimize, maximize };

struct SolveReport {
    SolveStatus status = SolveStatus::numerical_failure;
    double optimum = std::numeric_limits<double>::quiet_NaN();  // finite iff status == optimal
    double dual_optimum = std::numeric_limits<double>::quiet_NaN();
    Eigen::VectorXd primal_point;
    double solve_time = 0;  // seconds
    int iterations = 0;
    bool inaccurate = false;  // accepted at a relaxed tolerance
    std::string message;

    bool ok() const { return status == SolveStatus::optimal; }
};

// constant + sum_k v_k coef_k  >= 0 in the PSD order.
struct AffinePencil {
    SymSparse constant;
    std::vector<std::pair<int, SymSparse>> terms;

    int size() const { return constant.size(); }
};

// sum coef_k v_k = rhs
struct LinearEquation {
    std::vector<std::pair<int, double>> coef;
    double rhs = 0;
};

struct ConicProblem {
    int num_vars = 0;
    Eigen::VectorXd objective;
    Sense sense = Sense::minimize;
    std::vector<AffinePencil> psd_constraints;
    std::vector<LinearEquation> equality_constraints;
};

struct SolverOptions {
    double tol = 1e-8;
    int max_iterations = 120;
    double timeout_ms = 0;     // 0: no limit
    bool split_blocks = true;  // decompose each pencil into its connected components
    bool detect_equalities = true;

    // Reads SPECTRA_SOLVER_TOL and SPECTRA_SOLVER_TIMEOUT_MS.
    static SolverOptions from_env();
};

SolveReport solve(const ConicProblem& problem, const SolverOptions& opts = SolverOptions::from_env());

// Pencil of one block over the decision vector (x, y): x_i -> i, y_j -> n + j.
AffinePencil block_pencil(const BlockGroup& blk);

// Connected components of the aggregate sparsity pattern, as principal subpencils.
std::vector<AffinePencil> split_pencil(const AffinePencil& P);

// Moves pairs of 1x1 pencils that are exact negatives of each other into
// equalities.  Returns the remaining pencils.
std::vector<AffinePencil> extract_equalities(std::vector<AffinePencil> pencils, std::vector<LinearEquation>& eqs);

// max eps s.t. Lambda(x, y) >= eps I, optionally with x fixed.  Rows that pair
// into an equality keep eps out of them, so the margin of a lower-dimensional
// set is still positive in its relative interior.
SolveReport solve_feasibility_margin(const Shadow& S, const std::optional<Eigen::VectorXd>& fixed_x = std::nullopt,
                                     const SolverOptions& opts = SolverOptions::from_env());

// h_S(a) = max a^T x over S.  primal_point holds (x, y).
SolveReport solve_support(const Shadow& S, const Eigen::VectorXd& direction,
                          const SolverOptions& opts = SolverOptions::from_env());

// One problem per direction with a PSD multiplier per block; the reported
// optimum is sum_j tr(Lambda^(j) Z^(j)).  Failures stay local to a direction.
std::vector<SolveReport> solve_support_batch_dual(const Shadow& S, const std::vector<Eigen::VectorXd>& directions,
                                                  const SolverOptions& opts = SolverOptions::from_env());

// Same support problems with the whole pencil kept as one dense PSD block.
std::vector<SolveReport> solve_support_dense_primal(const Shadow& S, const std::vector<Eigen::VectorXd>& directions,
                                                    const SolverOptions& opts = SolverOptions::from_env());

struct Parallelotope {
    Eigen::MatrixXd T;        // symmetric positive definite
    Eigen::VectorXd c_prime;  // P = {x : |T x - c_prime|_inf <= 1}
    SolveReport report;
};

// Minimum-volume parallelotope {x : |Tx - c'| <= 1}, T > 0, containing the
// spectrahedron S (m = 0), certified by PSD multipliers per face.
Parallelotope solve_min_parallelotope(const Shadow& S, const SolverOptions& opts = SolverOptions::from_env());

} // namespace spectra
