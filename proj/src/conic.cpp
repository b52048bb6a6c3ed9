#include "spectra/conic.hpp"

#include <cmath>

namespace spectra {

using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

// Pencils of every block over a remapped decision vector.  var_of_x[i] < 0
// folds x_i into the constant with value x_fixed[i].
std::vector<AffinePencil> remapped_pencils(const Shadow& S, const std::vector<int>& var_of_x,
                                           const std::vector<int>& var_of_y, const VectorXd& x_fixed)
{
    std::vector<AffinePencil> out;
    for (const auto& blk : S.blocks()) {
        AffinePencil P;
        std::vector<std::pair<double, const SymSparse*>> constant{{1.0, &blk.lambda}};
        for (int i = 0; i < S.n(); ++i) {
            if (blk.a[i].is_zero())
                continue;
            if (var_of_x[i] < 0)
                constant.emplace_back(x_fixed(i), &blk.a[i]);
            else
                P.terms.emplace_back(var_of_x[i], blk.a[i]);
        }
        for (int j = 0; j < S.m(); ++j)
            if (!blk.b[j].is_zero())
                P.terms.emplace_back(var_of_y[j], blk.b[j]);
        P.constant = combine(blk.size, constant);
        out.push_back(std::move(P));
    }
    return out;
}

std::vector<int> iota_from(int start, int count)
{
    std::vector<int> v(count);
    for (int i = 0; i < count; ++i)
        v[i] = start + i;
    return v;
}

SolveReport support_problem(const Shadow& S, const VectorXd& a, const SolverOptions& opts, bool single_block)
{
    require_dim(a.size() == S.n(), "support: direction has wrong length");
    ConicProblem P;
    P.num_vars = S.n() + S.m();
    P.sense = Sense::maximize;
    P.objective = VectorXd::Zero(P.num_vars);
    P.objective.head(S.n()) = a;
    auto pencils = remapped_pencils(S, iota_from(0, S.n()), iota_from(S.n(), S.m()), VectorXd());
    if (!single_block) {
        P.psd_constraints = std::move(pencils);
        return solve(P, opts);
    }
    // one dense block of size s
    const int s = S.size();
    std::vector<SymSparse::Entry> c0;
    std::vector<std::vector<SymSparse::Entry>> terms(P.num_vars);
    int off = 0;
    for (const auto& pc : pencils) {
        for (const auto& e : pc.constant.entries())
            c0.push_back({e.row + off, e.col + off, e.value});
        for (const auto& [v, M] : pc.terms)
            for (const auto& e : M.entries())
                terms[v].push_back({e.row + off, e.col + off, e.value});
        off += pc.size();
    }
    AffinePencil big{SymSparse(s, c0), {}};
    for (int v = 0; v < P.num_vars; ++v)
        if (!terms[v].empty())
            big.terms.emplace_back(v, SymSparse(s, terms[v]));
    P.psd_constraints.push_back(std::move(big));
    SolverOptions o = opts;
    o.split_blocks = false;
    return solve(P, o);
}

} // namespace

SolveReport solve_feasibility_margin(const Shadow& S, const std::optional<VectorXd>& fixed_x,
                                     const SolverOptions& opts)
{
    const int n = S.n(), m = S.m();
    if (fixed_x)
        require_dim(fixed_x->size() == n, "solve_feasibility_margin: fixed_x has wrong length");
    std::vector<int> vx(n, -1), vy;
    int nv = 0;
    if (!fixed_x)
        vx = iota_from(0, n), nv = n;
    vy = iota_from(nv, m);
    nv += m;
    const int eps = nv++;

    ConicProblem P;
    P.num_vars = nv;
    P.sense = Sense::maximize;
    P.objective = VectorXd::Zero(nv);
    P.objective(eps) = 1;
    std::vector<AffinePencil> comps;
    for (const auto& pc : remapped_pencils(S, vx, vy, fixed_x ? *fixed_x : VectorXd()))
        for (auto& c : split_pencil(pc))
            comps.push_back(std::move(c));
    comps = extract_equalities(std::move(comps), P.equality_constraints);
    for (auto& c : comps) {
        c.terms.emplace_back(eps, SymSparse::diagonal(std::vector<double>(c.size(), -1.0)));
        P.psd_constraints.push_back(std::move(c));
    }
    SolveReport r = solve(P, opts);
    if (r.ok()) {
        VectorXd xy(n + m);
        if (fixed_x)
            xy << *fixed_x, r.primal_point.head(m);
        else
            xy = r.primal_point.head(n + m);
        r.primal_point = xy;
    }
    return r;
}

SolveReport solve_support(const Shadow& S, const VectorXd& direction, const SolverOptions& opts)
{
    return support_problem(S, direction, opts, false);
}

std::vector<SolveReport> solve_support_batch_dual(const Shadow& S, const std::vector<VectorXd>& directions,
                                                  const SolverOptions& opts)
{
    std::vector<SolveReport> out;
    for (const auto& a : directions) {
        SolveReport r;
        try {
            r = support_problem(S, a, opts, false);
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::numerical)
                throw;
            r.status = SolveStatus::numerical_failure;
            r.message = e.what();
        }
        if (r.ok())
            r.optimum = r.dual_optimum;
        out.push_back(std::move(r));
    }
    return out;
}

std::vector<SolveReport> solve_support_dense_primal(const Shadow& S, const std::vector<VectorXd>& directions,
                                                    const SolverOptions& opts)
{
    std::vector<SolveReport> out;
    for (const auto& a : directions)
        out.push_back(support_problem(S, a, opts, true));
    return out;
}

Parallelotope solve_min_parallelotope(const Shadow& S, const SolverOptions& opts)
{
    if (S.m() != 0)
        fail(ErrorKind::contract, "solve_min_parallelotope: spectrahedron (m = 0) expected");
    const int n = S.n();
    require_dim(n >= 1, "solve_min_parallelotope: empty ambient space");

    ConicProblem P;
    int nv = 0;
    auto fresh = [&](int k) {
        int first = nv;
        nv += k;
        return first;
    };
    // T symmetric, stored by (i <= j)
    MatrixXd tidx(n, n);
    const int t0 = fresh(n * (n + 1) / 2);
    for (int j = 0, k = t0; j < n; ++j)
        for (int i = 0; i <= j; ++i, ++k)
            tidx(i, j) = tidx(j, i) = k;
    const int cp = fresh(n);

    // face multipliers, one PSD variable per component of each block
    std::vector<AffinePencil> comps;
    for (const auto& blk : S.blocks())
        for (auto& c : split_pencil(block_pencil(blk)))
            comps.push_back(std::move(c));

    // rows of the equalities: <A_j, O^f> -/+ T_ij = 0 and <Lambda, O^f> +/- c'_i = 1
    std::vector<LinearEquation> eq_a(2 * n * n), eq_l(2 * n);
    for (int f = 0; f < 2 * n; ++f) {
        const int i = f % n;
        const double sg = f < n ? -1.0 : 1.0;
        for (int j = 0; j < n; ++j)
            eq_a[f * n + j].coef.emplace_back(static_cast<int>(tidx(i, j)), sg);
        eq_l[f].coef.emplace_back(cp + i, -sg);
        eq_l[f].rhs = 1;
        for (const auto& comp : comps) {
            const int p = comp.size();
            const int o0 = fresh(p * (p + 1) / 2);
            AffinePencil O{SymSparse(p), {}};
            MatrixXd Ld = comp.constant.dense();
            std::vector<MatrixXd> Ad(n);
            for (int j = 0; j < n; ++j)
                Ad[j] = MatrixXd::Zero(p, p);
            for (const auto& [v, M] : comp.terms)
                Ad[v] = M.dense();
            for (int c = 0, k = o0; c < p; ++c)
                for (int r = 0; r <= c; ++r, ++k) {
                    O.terms.emplace_back(k, SymSparse(p, {{r, c, 1.0}}));
                    const double w = r == c ? 1.0 : 2.0;
                    if (Ld(r, c) != 0)
                        eq_l[f].coef.emplace_back(k, w * Ld(r, c));
                    for (int j = 0; j < n; ++j)
                        if (Ad[j](r, c) != 0)
                            eq_a[f * n + j].coef.emplace_back(k, w * Ad[j](r, c));
                }
            P.psd_constraints.push_back(std::move(O));
        }
    }
    for (auto& e : eq_a)
        P.equality_constraints.push_back(std::move(e));
    for (auto& e : eq_l)
        P.equality_constraints.push_back(std::move(e));

    // [[T, L], [L', diag(L)]] >= 0 with L lower triangular
    const int l0 = fresh(n * (n + 1) / 2);
    MatrixXd lidx = MatrixXd::Constant(n, n, -1);
    for (int j = 0, k = l0; j < n; ++j)
        for (int i = j; i < n; ++i, ++k)
            lidx(i, j) = k;
    {
        AffinePencil D{SymSparse(2 * n), {}};
        for (int j = 0; j < n; ++j)
            for (int i = 0; i <= j; ++i)
                D.terms.emplace_back(static_cast<int>(tidx(i, j)), SymSparse(2 * n, {{i, j, 1.0}}));
        for (int j = 0; j < n; ++j)
            for (int i = j; i < n; ++i) {
                std::vector<SymSparse::Entry> e{{i, n + j, 1.0}};
                if (i == j)
                    e.push_back({n + j, n + j, 1.0});
                D.terms.emplace_back(static_cast<int>(lidx(i, j)), SymSparse(2 * n, e));
            }
        P.psd_constraints.push_back(std::move(D));
    }

    // t <= geometric mean of diag(L), padded with t to a power of two
    const int t = fresh(1);
    std::vector<int> level;
    for (int i = 0; i < n; ++i)
        level.push_back(static_cast<int>(lidx(i, i)));
    int width = 1;
    while (width < n)
        width *= 2;
    while (static_cast<int>(level.size()) < width)
        level.push_back(t);
    while (level.size() > 1) {
        std::vector<int> next;
        for (std::size_t k = 0; k + 1 < level.size(); k += 2) {
            const int w = fresh(1);
            AffinePencil G{SymSparse(2), {}};
            if (level[k] == level[k + 1]) {
                G.terms.emplace_back(level[k], SymSparse(2, {{0, 0, 1.0}, {1, 1, 1.0}}));
            } else {
                G.terms.emplace_back(level[k], SymSparse(2, {{0, 0, 1.0}}));
                G.terms.emplace_back(level[k + 1], SymSparse(2, {{1, 1, 1.0}}));
            }
            G.terms.emplace_back(w, SymSparse(2, {{0, 1, 1.0}}));
            P.psd_constraints.push_back(std::move(G));
            next.push_back(w);
        }
        level = std::move(next);
    }
    if (level[0] != t) {
        AffinePencil R{SymSparse(1), {}};
        R.terms.emplace_back(level[0], SymSparse(1, {{0, 0, 1.0}}));
        R.terms.emplace_back(t, SymSparse(1, {{0, 0, -1.0}}));
        P.psd_constraints.push_back(std::move(R));
    }

    P.num_vars = nv;
    P.sense = Sense::maximize;
    P.objective = VectorXd::Zero(nv);
    P.objective(t) = 1;

    Parallelotope out;
    out.report = solve(P, opts);
    out.T = MatrixXd::Zero(n, n);
    out.c_prime = VectorXd::Zero(n);
    if (!out.report.ok())
        return out;
    const VectorXd& v = out.report.primal_point;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            out.T(i, j) = v(static_cast<int>(tidx(i, j)));
    out.c_prime = v.segment(cp, n);
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(out.T, Eigen::EigenvaluesOnly);
    if (!(es.eigenvalues()(0) > 0)) {
        out.report.status = SolveStatus::numerical_failure;
        out.report.message = "T is not positive definite";
        out.report.optimum = std::numeric_limits<double>::quiet_NaN();
    }
    return out;
}

} // namespace spectra
