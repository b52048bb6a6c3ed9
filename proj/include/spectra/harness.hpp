#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "spectra/core.hpp"
#include "spectra/ops.hpp"

namespace spectra {

// x+ = A x + B u + L w,  y = C x + F v
struct LinearSystem {
    Eigen::MatrixXd A, B, L, C, F;
};

struct EstimationRun {
    LinearSystem system;
    Shadow X0, W, V;
    int horizon = 1;
    std::optional<int> reduce_every;
    int reduce_target = 10;  // directions of the polyhedral reduction
    std::uint64_t seed = 0;
};

struct ReachRun {
    Eigen::MatrixXd A, B;
    Eigen::VectorXd x_bar0, u_bar;
    std::vector<Eigen::MatrixXd> Q_list, U_list;  // ellipsoid shapes around the nominal points
    Rational p1, p2;
    int horizon = 1;
};

struct StepLog {
    int k = 0;
    std::size_t set_bytes = 0;
    double wall_ms = 0;
    std::optional<double> volume_estimate;
    int containment_checks = 0;  // passed
    int containment_total = 0;
};

void write_jsonl(std::ostream& os, const StepLog& log);

// X_{k+1} = ((A X_k + B u) + L W)  intersected with  {x : C x in y + (-F) V}.
// Throws a contract error when the intersection is empty.
Shadow sme_step(const Shadow& Xk, const Eigen::VectorXd& y_next, const Eigen::VectorXd& u,
                const EstimationRun& run, bool check_nonempty = true);

// X_{k+1} = A X_k + B U_k
Shadow reach_step(const Shadow& Xk, const Shadow& Uk, const Eigen::MatrixXd& A, const Eigen::MatrixXd& B);

struct LpInitialSets {
    Shadow X0;
    Shadow U;
};

LpInitialSets build_lp_initial_sets(const ReachRun& run);

struct VolumeEstimate {
    double value = 0;
    double error = 0;  // half-gap (n = 2) or 95% half-width (n = 3)
    bool degenerate = false;
};

VolumeEstimate estimate_volume(const Shadow& S, int k_dirs, std::uint64_t seed = 0, int samples = 4000);

// Entries uniform in [-1, 1], A rescaled to spectral radius in [0.7, 1.05].
// n_u = 1, n_w = d, n_y = n_v = ceil(d / 2).
LinearSystem random_system(int d, std::uint64_t seed);

// Standard noise sets of the random recipe: unit boxes for X0 and W, V the
// ball of radius 0.5.
EstimationRun random_estimation_run(int d, int horizon, std::optional<int> reduce_every, std::uint64_t seed);

// Support maximizers in angular order (n = 2).
std::vector<Eigen::Vector2d> emit_plot_data(const Shadow& S, int k_dirs);
void write_plot_csv(std::ostream& os, const std::vector<Eigen::Vector2d>& pts);

struct EstimationResult {
    std::vector<StepLog> logs;                 // k = 0..horizon
    std::vector<Eigen::VectorXd> true_states;  // k = 0..horizon
    int contained = 0;                         // steps k >= 1 whose true state is a member
};

// Simulates the system from a random admissible start, propagating the
// estimate and checking the true state at every step.
EstimationResult run_estimation(const EstimationRun& run, std::ostream* log = nullptr, bool with_volume = false);

struct ReachResult {
    std::vector<StepLog> logs;
    std::vector<Shadow> sets;  // X_0..X_K
};

// Propagates the reachable sets and checks `samples` simulated trajectories
// per step (0 disables the check).
ReachResult run_reach(const ReachRun& run, int samples, std::uint64_t seed, std::ostream* log = nullptr);

// Uniform sampling helpers.
Eigen::VectorXd sample_box(const Eigen::VectorXd& lo, const Eigen::VectorXd& hi, std::mt19937_64& rng);
Eigen::VectorXd sample_ellipsoid(const Eigen::MatrixXd& Q, std::mt19937_64& rng);  // centered at 0

// A point of E_1 +_p E_2 +_p ... (centered ellipsoids) from the
// t^{1/p'} x + (1 - t)^{1/p'} y parametrization, folded left.
Eigen::VectorXd sample_lp_sum(const std::vector<Eigen::MatrixXd>& shapes, const Rational& p, std::mt19937_64& rng);

// The maximizer of a' x over the same set.
Eigen::VectorXd lp_sum_maximizer(const std::vector<Eigen::MatrixXd>& shapes, const Rational& p,
                                 const Eigen::VectorXd& a);

// Random bounded spectrahedron {x : I + sum x_i A_i >= 0} with Gaussian A_i.
Shadow random_spectrahedron(int n, int size, std::uint64_t seed);

} // namespace spectra
