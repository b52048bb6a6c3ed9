#include "spectra/validate.hpp"

#include <cmath>
#include <limits>

namespace spectra {

using Eigen::MatrixXd;
using Eigen::VectorXd;

const char* to_string(BoundednessReport::Branch b)
{
    switch (b) {
    case BoundednessReport::Branch::rankP_deficient: return "rankP_deficient";
    case BoundednessReport::Branch::rank_sum_mismatch: return "rank_sum_mismatch";
    case BoundednessReport::Branch::trace_zero: return "trace_zero";
    case BoundednessReport::Branch::sdp_test: return "sdp_test";
    }
    return "?";
}

VectorXd tvec(const SymSparse& M)
{
    const int s = M.size();
    VectorXd v = VectorXd::Zero(s * (s + 1) / 2);
    for (const auto& e : M.entries())
        v(e.col * (e.col + 1) / 2 + e.row) = e.value;
    return v;
}

namespace {

double margin_of(const SolveReport& r, const char* what)
{
    switch (r.status) {
    case SolveStatus::optimal: return r.optimum;
    case SolveStatus::unbounded: return std::numeric_limits<double>::infinity();
    case SolveStatus::infeasible: return -std::numeric_limits<double>::infinity();
    case SolveStatus::numerical_failure: break;
    }
    fail(ErrorKind::numerical, std::string(what) + ": solver failed (" + r.message + ")");
}

int rank_of(const MatrixXd& M)
{
    if (M.rows() == 0 || M.cols() == 0)
        return 0;
    Eigen::BDCSVD<MatrixXd> svd(M);
    const VectorXd& sv = svd.singularValues();
    if (sv.size() == 0 || sv(0) == 0)
        return 0;
    const double cut = 1e-9 * sv(0) * static_cast<double>(std::max(M.rows(), M.cols()));
    return static_cast<int>((sv.array() > cut).count());
}

// Rows of P and Q: the per-block tvecs stacked (off-block entries are zero).
MatrixXd stacked_tvecs(const Shadow& S, bool lifted)
{
    int rows = 0;
    for (const auto& blk : S.blocks())
        rows += blk.size * (blk.size + 1) / 2;
    const int cols = lifted ? S.m() : S.n();
    MatrixXd M = MatrixXd::Zero(rows, cols);
    int off = 0;
    for (const auto& blk : S.blocks()) {
        const int r = blk.size * (blk.size + 1) / 2;
        for (int k = 0; k < cols; ++k)
            M.col(k).segment(off, r) = tvec(lifted ? blk.b[k] : blk.a[k]);
        off += r;
    }
    return M;
}

} // namespace

EmptinessResult is_empty(const Shadow& S)
{
    SolveReport r = solve_feasibility_margin(S);
    const double eps = margin_of(r, "is_empty");
    return {eps < -kValidateTol * (1 + S.lambda_norm()), eps, std::move(r)};
}

MembershipResult contains_point(const Shadow& S, const VectorXd& v)
{
    require_dim(v.size() == S.n(), "contains_point: point has wrong length");
    SolveReport r = solve_feasibility_margin(S, v);
    const double eps = margin_of(r, "contains_point");
    return {eps >= -kValidateTol * (1 + S.lambda_norm()), eps, std::move(r)};
}

BoundednessReport is_bounded(const Shadow& S)
{
    if (is_empty(S).empty)
        fail(ErrorKind::contract, "is_bounded: set is empty");
    BoundednessReport rep;
    const MatrixXd P = stacked_tvecs(S, false);
    const MatrixXd Q = stacked_tvecs(S, true);
    MatrixXd PQ(P.rows(), P.cols() + Q.cols());
    PQ << P, Q;
    rep.rank_p = rank_of(P);
    rep.rank_q = rank_of(Q);
    rep.rank_pq = rank_of(PQ);
    if (rep.rank_p < S.n()) {
        rep.branch = BoundednessReport::Branch::rankP_deficient;
        rep.bounded = false;
        return rep;
    }
    if (rep.rank_p + rep.rank_q != rep.rank_pq) {
        rep.branch = BoundednessReport::Branch::rank_sum_mismatch;
        rep.bounded = false;
        return rep;
    }

    const int n = S.n(), m = S.m();
    LinearEquation trace_eq;
    trace_eq.rhs = 1;
    bool all_zero = true;
    for (int i = 0; i < n + m; ++i) {
        double t = 0;
        for (const auto& blk : S.blocks())
            t += i < n ? blk.a[i].trace() : blk.b[i - n].trace();
        if (std::abs(t) > 1e-12) {
            all_zero = false;
            trace_eq.coef.emplace_back(i, t);
        }
    }
    if (all_zero) {
        rep.branch = BoundednessReport::Branch::trace_zero;
        rep.bounded = true;
        return rep;
    }

    // max eps  s.t.  sum x_i A_i + sum y_j B_j >= eps I,  trace = 1
    rep.branch = BoundednessReport::Branch::sdp_test;
    ConicProblem prob;
    const int eps = n + m;
    prob.num_vars = n + m + 1;
    prob.sense = Sense::maximize;
    prob.objective = VectorXd::Zero(prob.num_vars);
    prob.objective(eps) = 1;
    prob.equality_constraints.push_back(trace_eq);
    std::vector<AffinePencil> comps;
    for (const auto& blk : S.blocks()) {
        AffinePencil hp = block_pencil(blk);
        hp.constant = SymSparse(blk.size);
        for (auto& c : split_pencil(hp)) {
            bool zero = true;
            for (const auto& [v, M] : c.terms)
                zero = zero && M.is_zero();
            if (!zero)
                comps.push_back(std::move(c));
        }
    }
    // paired rows are homogeneous equalities; no eps shift on them
    comps = extract_equalities(std::move(comps), prob.equality_constraints);
    for (auto& c : comps) {
        c.terms.emplace_back(eps, SymSparse::diagonal(std::vector<double>(c.size(), -1.0)));
        prob.psd_constraints.push_back(std::move(c));
    }
    SolveReport r = solve(prob);
    const double e = margin_of(r, "is_bounded");
    rep.eps_b = e;
    rep.bounded = e < -kBoundedTol;
    return rep;
}

} // namespace spectra
