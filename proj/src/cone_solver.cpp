// Primal-dual interior-point method for
//
//   minimize c'v  s.t.  S = F0 + sum_k v_k F_k  in K,
//
// K a product of nonnegative rays and PSD cones.  The iteration runs on the
// homogeneous self-dual embedding, so infeasibility and unboundedness come
// back as certificates instead of divergence.  Nesterov-Todd scaling,
// Mehrotra predictor-corrector, dense normal equations.

#include "spectra/conic.hpp"

#include <Eigen/Sparse>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <iostream>
#include <map>
#include <numeric>

namespace spectra {

using Eigen::MatrixXd;
using Eigen::VectorXd;

const char* to_string(SolveStatus s)
{
    switch (s) {
    case SolveStatus::optimal: return "optimal";
    case SolveStatus::infeasible: return "infeasible";
    case SolveStatus::unbounded: return "unbounded";
    case SolveStatus::numerical_failure: return "numerical_failure";
    }
    return "unknown";
}

SolverOptions SolverOptions::from_env()
{
    SolverOptions o;
    if (const char* t = std::getenv("SPECTRA_SOLVER_TOL")) {
        double v = std::atof(t);
        if (v > 0)
            o.tol = v;
    }
    if (const char* t = std::getenv("SPECTRA_SOLVER_TIMEOUT_MS")) {
        double v = std::atof(t);
        if (v > 0)
            o.timeout_ms = v;
    }
    return o;
}

AffinePencil block_pencil(const BlockGroup& blk)
{
    AffinePencil P{blk.lambda, {}};
    int n = static_cast<int>(blk.a.size());
    for (int i = 0; i < n; ++i)
        if (!blk.a[i].is_zero())
            P.terms.emplace_back(i, blk.a[i]);
    for (int j = 0; j < static_cast<int>(blk.b.size()); ++j)
        if (!blk.b[j].is_zero())
            P.terms.emplace_back(n + j, blk.b[j]);
    return P;
}

std::vector<AffinePencil> split_pencil(const AffinePencil& P)
{
    const int s = P.size();
    std::vector<int> parent(s);
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](int i) {
        while (parent[i] != i)
            i = parent[i] = parent[parent[i]];
        return i;
    };
    auto link = [&](const SymSparse& M) {
        for (const auto& e : M.entries())
            if (e.row != e.col)
                parent[find(e.row)] = find(e.col);
    };
    link(P.constant);
    for (const auto& [v, M] : P.terms)
        link(M);

    std::vector<int> comp(s), local(s);
    std::map<int, int> ids;
    std::vector<int> sizes;
    for (int i = 0; i < s; ++i) {
        int r = find(i);
        auto it = ids.find(r);
        if (it == ids.end()) {
            it = ids.emplace(r, static_cast<int>(sizes.size())).first;
            sizes.push_back(0);
        }
        comp[i] = it->second;
        local[i] = sizes[it->second]++;
    }
    if (sizes.size() == 1)
        return {P};

    auto restrict = [&](const SymSparse& M, std::vector<std::vector<SymSparse::Entry>>& out) {
        for (auto& v : out)
            v.clear();
        for (const auto& e : M.entries())
            out[comp[e.row]].push_back({local[e.row], local[e.col], e.value});
    };
    const int nc = static_cast<int>(sizes.size());
    std::vector<AffinePencil> parts(nc);
    std::vector<std::vector<SymSparse::Entry>> buf(nc);
    restrict(P.constant, buf);
    for (int c = 0; c < nc; ++c)
        parts[c].constant = SymSparse(sizes[c], buf[c]);
    for (const auto& [v, M] : P.terms) {
        restrict(M, buf);
        for (int c = 0; c < nc; ++c)
            if (!buf[c].empty())
                parts[c].terms.emplace_back(v, SymSparse(sizes[c], buf[c]));
    }
    return parts;
}

std::vector<AffinePencil> extract_equalities(std::vector<AffinePencil> pencils, std::vector<LinearEquation>& eqs)
{
    // A 1x1 pencil is the row  c0 + a'v >= 0; normalize (c0, a) to unit norm
    // and look for the exact negative.
    using Key = std::vector<std::pair<int, double>>;
    auto row_of = [](const AffinePencil& P) {
        Key k;
        double c0 = P.constant.is_zero() ? 0.0 : P.constant.entries()[0].value;
        k.emplace_back(-1, c0);
        for (const auto& [v, M] : P.terms)
            if (!M.is_zero())
                k.emplace_back(v, M.entries()[0].value);
        std::sort(k.begin(), k.end());
        double nrm = 0;
        for (auto& [v, x] : k)
            nrm += x * x;
        nrm = std::sqrt(nrm);
        if (nrm > 0)
            for (auto& [v, x] : k)
                x /= nrm;
        return k;
    };
    auto quant = [](const Key& k, double sign) {
        std::vector<std::pair<int, long long>> q;
        for (const auto& [v, x] : k)
            q.emplace_back(v, std::llround(sign * x * 1e9));
        return q;
    };

    std::map<std::vector<std::pair<int, long long>>, std::vector<int>> open;
    std::vector<Key> keys(pencils.size());
    std::vector<bool> taken(pencils.size(), false);
    for (int i = 0; i < static_cast<int>(pencils.size()); ++i) {
        if (pencils[i].size() != 1)
            continue;
        keys[i] = row_of(pencils[i]);
        if (keys[i].size() < 2)
            continue;  // constant row
        auto neg = quant(keys[i], -1.0);
        auto it = open.find(neg);
        bool matched = false;
        if (it != open.end()) {
            for (auto jt = it->second.begin(); jt != it->second.end(); ++jt) {
                const Key& kj = keys[*jt];
                bool same = kj.size() == keys[i].size();
                for (std::size_t t = 0; same && t < kj.size(); ++t)
                    same = kj[t].first == keys[i][t].first && std::abs(kj[t].second + keys[i][t].second) <= 1e-12;
                if (!same)
                    continue;
                LinearEquation eq;
                const AffinePencil& P = pencils[*jt];
                for (const auto& [v, M] : P.terms)
                    if (!M.is_zero())
                        eq.coef.emplace_back(v, M.entries()[0].value);
                eq.rhs = P.constant.is_zero() ? 0.0 : -P.constant.entries()[0].value;
                eqs.push_back(std::move(eq));
                taken[i] = taken[*jt] = true;
                it->second.erase(jt);
                matched = true;
                break;
            }
        }
        if (!matched)
            open[quant(keys[i], 1.0)].push_back(i);
    }
    std::vector<AffinePencil> rest;
    for (int i = 0; i < static_cast<int>(pencils.size()); ++i)
        if (!taken[i])
            rest.push_back(std::move(pencils[i]));
    return rest;
}

namespace {

struct DenseBlock {
    MatrixXd F0;
    std::vector<int> vars;
    std::vector<MatrixXd> F;
};

// Reduced problem handed to the interior-point loop.
struct Reduced {
    int nv = 0;
    VectorXd c;
    VectorXd h_lp;                                      // s_lp = h_lp + G_lp v
    Eigen::SparseMatrix<double, Eigen::RowMajor> G_lp;  // rows x nv
    std::vector<DenseBlock> sdp;
};

struct IpmResult {
    SolveStatus status = SolveStatus::numerical_failure;
    VectorXd v;
    double pobj = 0;
    double dobj = 0;
    int iterations = 0;
    bool inaccurate = false;
    std::string message;
};

double frob_dot(const MatrixXd& A, const MatrixXd& B) { return (A.array() * B.array()).sum(); }

struct Scaling {
    MatrixXd R;
    MatrixXd Rinv;
    VectorXd lambda;
};

// Factor F with M = F F'; Cholesky when possible.
MatrixXd psd_factor(const MatrixXd& M)
{
    Eigen::LLT<MatrixXd> llt(M);
    if (llt.info() == Eigen::Success)
        return llt.matrixL();
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(M);
    VectorXd d = es.eigenvalues().cwiseMax(1e-300).cwiseSqrt();
    return es.eigenvectors() * d.asDiagonal();
}

Scaling nt_scaling(const MatrixXd& S, const MatrixXd& Z)
{
    MatrixXd L1 = psd_factor(S), L2 = psd_factor(Z);
    Eigen::JacobiSVD<MatrixXd> svd(L2.transpose() * L1, Eigen::ComputeFullU | Eigen::ComputeFullV);
    VectorXd lam = svd.singularValues().cwiseMax(1e-300);
    Scaling sc;
    VectorXd isq = lam.cwiseSqrt().cwiseInverse();
    sc.R = L1 * svd.matrixV() * isq.asDiagonal();
    MatrixXd L1inv = L1.fullPivLu().inverse();
    sc.Rinv = lam.cwiseSqrt().asDiagonal() * svd.matrixV().transpose() * L1inv;
    sc.lambda = lam;
    return sc;
}

// Largest alpha with  X + alpha dX  PSD, X = R diag(lam) R' in scaled form.
double max_step_psd(const VectorXd& lam, const MatrixXd& dXs)
{
    VectorXd isq = lam.cwiseSqrt().cwiseInverse();
    MatrixXd M = isq.asDiagonal() * dXs * isq.asDiagonal();
    M = 0.5 * (M + M.transpose());
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(M, Eigen::EigenvaluesOnly);
    double mn = es.eigenvalues()(0);
    return mn >= 0 ? std::numeric_limits<double>::infinity() : -1.0 / mn;
}

// X = diag(lam);  solves (X Y + Y X)/2 = W for Y.
MatrixXd lyap_diag(const VectorXd& lam, const MatrixXd& W)
{
    MatrixXd Y(W.rows(), W.cols());
    for (int j = 0; j < W.cols(); ++j)
        for (int i = 0; i < W.rows(); ++i)
            Y(i, j) = 2 * W(i, j) / (lam(i) + lam(j));
    return Y;
}

class Ipm {
public:
    Ipm(const Reduced& P, const SolverOptions& o) : P_(P), o_(o) {}

    IpmResult run();

private:
    const Reduced& P_;
    const SolverOptions& o_;

    int nl_ = 0;
    VectorXd s_, z_;
    std::vector<MatrixXd> S_, Z_;

    // scaling for the current iterate
    VectorXd lam_lp_, r_lp_;  // r_lp^2 = s/z
    std::vector<Scaling> sc_;
    std::vector<std::vector<MatrixXd>> Ft_;  // Rinv F Rinv'
    Eigen::LLT<MatrixXd> chol_;
    MatrixXd H_;

    VectorXd A_lp(const VectorXd& v) const { return P_.G_lp * v; }

    MatrixXd A_sd(int k, const VectorXd& v) const
    {
        const DenseBlock& b = P_.sdp[k];
        MatrixXd M = MatrixXd::Zero(b.F0.rows(), b.F0.cols());
        for (std::size_t t = 0; t < b.vars.size(); ++t)
            M += v(b.vars[t]) * b.F[t];
        return M;
    }

    VectorXd A_adj(const VectorXd& zl, const std::vector<MatrixXd>& Z) const
    {
        VectorXd g = P_.G_lp.transpose() * zl;
        for (std::size_t k = 0; k < P_.sdp.size(); ++k) {
            const DenseBlock& b = P_.sdp[k];
            for (std::size_t t = 0; t < b.vars.size(); ++t)
                g(b.vars[t]) += frob_dot(b.F[t], Z[k]);
        }
        return g;
    }

    // A^* W^{-1} (X)
    VectorXd A_adj_winv(const VectorXd& xl, const std::vector<MatrixXd>& X) const
    {
        VectorXd wl = xl.cwiseQuotient(r_lp_.cwiseAbs2().cwiseAbs2());
        VectorXd g = P_.G_lp.transpose() * wl;
        for (std::size_t k = 0; k < P_.sdp.size(); ++k) {
            const DenseBlock& b = P_.sdp[k];
            MatrixXd Xt = sc_[k].Rinv * X[k] * sc_[k].Rinv.transpose();
            for (std::size_t t = 0; t < b.vars.size(); ++t)
                g(b.vars[t]) += frob_dot(Ft_[k][t], Xt);
        }
        return g;
    }

    void winv(VectorXd& xl, std::vector<MatrixXd>& X) const
    {
        xl = xl.cwiseQuotient(r_lp_.cwiseAbs2().cwiseAbs2());
        for (std::size_t k = 0; k < X.size(); ++k)
            X[k] = sc_[k].Rinv.transpose() * (sc_[k].Rinv * X[k] * sc_[k].Rinv.transpose()) * sc_[k].Rinv;
    }

    VectorXd solve_h(const VectorXd& rhs) const
    {
        VectorXd x = chol_.solve(rhs);
        for (int it = 0; it < 2; ++it)
            x += chol_.solve(rhs - H_ * x);
        return x;
    }

    bool factor();
};

bool Ipm::factor()
{
    const int nv = P_.nv;
    H_ = MatrixXd::Zero(nv, nv);
    if (nl_ > 0) {
        VectorXd d = z_.cwiseQuotient(s_);
        Eigen::SparseMatrix<double> Gd = (d.asDiagonal() * P_.G_lp).eval();
        H_ += MatrixXd(P_.G_lp.transpose() * Gd);
    }
    Ft_.resize(P_.sdp.size());
    for (std::size_t k = 0; k < P_.sdp.size(); ++k) {
        const DenseBlock& b = P_.sdp[k];
        auto& Ft = Ft_[k];
        Ft.resize(b.vars.size());
        for (std::size_t t = 0; t < b.vars.size(); ++t)
            Ft[t] = sc_[k].Rinv * b.F[t] * sc_[k].Rinv.transpose();
        for (std::size_t t = 0; t < b.vars.size(); ++t)
            for (std::size_t u = 0; u <= t; ++u) {
                double h = frob_dot(Ft[t], Ft[u]);
                H_(b.vars[t], b.vars[u]) += h;
                if (u != t)
                    H_(b.vars[u], b.vars[t]) += h;
            }
    }
    double dmax = nv > 0 ? H_.diagonal().cwiseAbs().maxCoeff() : 0.0;
    for (double delta = 1e-13; delta < 1e-2; delta *= 100) {
        MatrixXd Hr = H_;
        Hr.diagonal().array() += delta * (1 + dmax);
        chol_.compute(Hr);
        if (chol_.info() == Eigen::Success)
            return true;
    }
    return false;
}

IpmResult Ipm::run()
{
    using clock = std::chrono::steady_clock;
    const auto t0 = clock::now();
    const int nv = P_.nv;
    const int nk = static_cast<int>(P_.sdp.size());
    nl_ = static_cast<int>(P_.h_lp.size());

    double nu = nl_;
    for (const auto& b : P_.sdp)
        nu += b.F0.rows();

    double nF0 = P_.h_lp.squaredNorm();
    for (const auto& b : P_.sdp)
        nF0 += b.F0.squaredNorm();
    nF0 = std::sqrt(nF0);
    const double nc = P_.c.norm();

    VectorXd v = VectorXd::Zero(nv);
    s_ = VectorXd::Ones(nl_);
    z_ = VectorXd::Ones(nl_);
    S_.clear();
    Z_.clear();
    for (const auto& b : P_.sdp) {
        S_.push_back(MatrixXd::Identity(b.F0.rows(), b.F0.rows()));
        Z_.push_back(MatrixXd::Identity(b.F0.rows(), b.F0.rows()));
    }
    double tau = 1, kappa = 1;

    IpmResult res;
    struct Best {
        double score = std::numeric_limits<double>::infinity();
        VectorXd v;
        double pobj = 0, dobj = 0;
    } best;

    auto dot_cone = [&](const VectorXd& al, const std::vector<MatrixXd>& A, const VectorXd& bl,
                        const std::vector<MatrixXd>& B) {
        double d = al.dot(bl);
        for (int k = 0; k < nk; ++k)
            d += frob_dot(A[k], B[k]);
        return d;
    };
    auto F0dot = [&](const VectorXd& zl, const std::vector<MatrixXd>& Z) {
        double d = P_.h_lp.dot(zl);
        for (int k = 0; k < nk; ++k)
            d += frob_dot(P_.sdp[k].F0, Z[k]);
        return d;
    };

    const double tol = o_.tol;
    for (int iter = 0; iter <= o_.max_iterations; ++iter) {
        res.iterations = iter;
        // residuals
        VectorXd rd = A_adj(z_, Z_) - P_.c * tau;
        VectorXd rp_l = s_ - P_.h_lp * tau - A_lp(v);
        std::vector<MatrixXd> rp_s(nk);
        double nrp = rp_l.squaredNorm();
        for (int k = 0; k < nk; ++k) {
            rp_s[k] = S_[k] - P_.sdp[k].F0 * tau - A_sd(k, v);
            nrp += rp_s[k].squaredNorm();
        }
        nrp = std::sqrt(nrp);
        const double cv = P_.c.dot(v), fz = F0dot(z_, Z_);
        const double rg = cv + fz + kappa;
        const double sz = dot_cone(s_, S_, z_, Z_);
        const double mu = (sz + tau * kappa) / (nu + 1);

        const double pres = nrp / tau / (1 + nF0);
        const double dres = rd.norm() / tau / (1 + nc);
        const double pobj = cv / tau, dobj = -fz / tau;
        const double scale = 1 + std::abs(pobj) + std::abs(dobj);
        const double gap = std::max(sz / (tau * tau), std::abs(pobj - dobj)) / scale;

        double score = std::max({pres, dres, gap});
        if (score < best.score) {
            best.score = score;
            best.v = v / tau;
            best.pobj = pobj;
            best.dobj = dobj;
        }
        if (pres <= tol && dres <= tol && gap <= tol) {
            res.status = SolveStatus::optimal;
            res.v = v / tau;
            res.pobj = pobj;
            res.dobj = dobj;
            return res;
        }
        // certificates
        if (fz < 0) {
            double pinf = A_adj(z_, Z_).norm() / std::max(1.0, nc) / (-fz / std::max(1.0, nF0));
            if (pinf <= tol) {
                res.status = SolveStatus::infeasible;
                return res;
            }
        }
        if (cv < 0) {
            double nr = (s_ - A_lp(v)).squaredNorm();
            for (int k = 0; k < nk; ++k)
                nr += (S_[k] - A_sd(k, v)).squaredNorm();
            double dinf = std::sqrt(nr) / std::max(1.0, nF0) / (-cv / std::max(1.0, nc));
            if (dinf <= tol) {
                res.status = SolveStatus::unbounded;
                return res;
            }
        }
        if (iter == o_.max_iterations)
            break;
        if (o_.timeout_ms > 0 &&
            std::chrono::duration<double, std::milli>(clock::now() - t0).count() > o_.timeout_ms) {
            res.message = "timeout";
            break;
        }

        // scaling
        r_lp_ = (s_.cwiseQuotient(z_)).cwiseSqrt().cwiseSqrt();
        lam_lp_ = s_.cwiseProduct(z_).cwiseSqrt();
        sc_.resize(nk);
        for (int k = 0; k < nk; ++k)
            sc_[k] = nt_scaling(S_[k], Z_[k]);
        if (!factor()) {
            res.message = "normal equations are singular";
            break;
        }

        // q = -H^{-1}(A* W^{-1} F0 + c),  Z2 = -W^{-1}(A q + F0)
        std::vector<MatrixXd> F0s(nk);
        for (int k = 0; k < nk; ++k)
            F0s[k] = P_.sdp[k].F0;
        VectorXd q = -solve_h(A_adj_winv(P_.h_lp, F0s) + P_.c);
        VectorXd Z2l = -(A_lp(q) + P_.h_lp);
        std::vector<MatrixXd> Z2s(nk);
        for (int k = 0; k < nk; ++k)
            Z2s[k] = -(A_sd(k, q) + P_.sdp[k].F0);
        winv(Z2l, Z2s);
        const double den = P_.c.dot(q) + F0dot(Z2l, Z2s) - kappa / tau;

        struct Dir {
            VectorXd v, sl, zl;
            std::vector<MatrixXd> S, Z;
            double tau = 0, kappa = 0;
        };

        // Solves the Newton system for linear-residual weight eta and
        // complementarity targets (uc_l, uc_s) given in scaled form.
        auto direction = [&](double eta, const VectorXd& ul, const std::vector<MatrixXd>& us, double rhs_k) {
            Dir d;
            VectorXd rho_pl = -eta * rp_l;
            std::vector<MatrixXd> rho_ps(nk);
            for (int k = 0; k < nk; ++k)
                rho_ps[k] = -eta * rp_s[k];
            VectorXd rho_d = -eta * rd;
            double rho_g = -eta * rg;

            // Ds0 = R u R'
            VectorXd Dl = r_lp_.cwiseAbs2().cwiseProduct(ul);
            std::vector<MatrixXd> Ds(nk);
            for (int k = 0; k < nk; ++k)
                Ds[k] = sc_[k].R * us[k] * sc_[k].R.transpose();

            VectorXd Xl = Dl - rho_pl;
            std::vector<MatrixXd> Xs(nk);
            for (int k = 0; k < nk; ++k)
                Xs[k] = Ds[k] - rho_ps[k];
            VectorXd p = solve_h(A_adj_winv(Xl, Xs) - rho_d);
            VectorXd Z1l = Xl - A_lp(p);
            std::vector<MatrixXd> Z1s(nk);
            for (int k = 0; k < nk; ++k)
                Z1s[k] = Xs[k] - A_sd(k, p);
            winv(Z1l, Z1s);

            d.tau = (rho_g - rhs_k / tau - P_.c.dot(p) - F0dot(Z1l, Z1s)) / den;
            d.v = p + d.tau * q;
            d.zl = Z1l + d.tau * Z2l;
            d.Z.resize(nk);
            for (int k = 0; k < nk; ++k)
                d.Z[k] = Z1s[k] + d.tau * Z2s[k];
            d.sl = rho_pl + P_.h_lp * d.tau + A_lp(d.v);
            d.S.resize(nk);
            for (int k = 0; k < nk; ++k) {
                d.S[k] = rho_ps[k] + P_.sdp[k].F0 * d.tau + A_sd(k, d.v);
                d.S[k] = 0.5 * (d.S[k] + d.S[k].transpose());
                d.Z[k] = 0.5 * (d.Z[k] + d.Z[k].transpose());
            }
            d.kappa = (rhs_k - kappa * d.tau) / tau;
            return d;
        };

        auto step_length = [&](const Dir& d) {
            double a = std::numeric_limits<double>::infinity();
            for (int i = 0; i < nl_; ++i) {
                if (d.sl(i) < 0)
                    a = std::min(a, -s_(i) / d.sl(i));
                if (d.zl(i) < 0)
                    a = std::min(a, -z_(i) / d.zl(i));
            }
            for (int k = 0; k < nk; ++k) {
                MatrixXd dSs = sc_[k].Rinv * d.S[k] * sc_[k].Rinv.transpose();
                MatrixXd dZs = sc_[k].R.transpose() * d.Z[k] * sc_[k].R;
                a = std::min(a, max_step_psd(sc_[k].lambda, dSs));
                a = std::min(a, max_step_psd(sc_[k].lambda, dZs));
            }
            if (d.tau < 0)
                a = std::min(a, -tau / d.tau);
            if (d.kappa < 0)
                a = std::min(a, -kappa / d.kappa);
            return a;
        };

        // predictor
        VectorXd ul = -lam_lp_;
        std::vector<MatrixXd> us(nk);
        for (int k = 0; k < nk; ++k)
            us[k] = -MatrixXd(sc_[k].lambda.asDiagonal());
        Dir aff = direction(1.0, ul, us, -tau * kappa);
        double a_aff = std::min(1.0, step_length(aff));
        double sigma = std::pow(1 - a_aff, 3);
        sigma = std::clamp(sigma, 0.0, 1.0);

        // corrector: lam o (dS~ + dZ~) = -lam o lam + sigma mu e - dS~a o dZ~a
        {
            VectorXd r2 = r_lp_.cwiseAbs2();
            VectorXd dsa = aff.sl.cwiseQuotient(r2), dza = aff.zl.cwiseProduct(r2);
            VectorXd w = -lam_lp_.cwiseAbs2() + VectorXd::Constant(nl_, sigma * mu) - dsa.cwiseProduct(dza);
            ul = w.cwiseQuotient(lam_lp_);
            for (int k = 0; k < nk; ++k) {
                MatrixXd dSs = sc_[k].Rinv * aff.S[k] * sc_[k].Rinv.transpose();
                MatrixXd dZs = sc_[k].R.transpose() * aff.Z[k] * sc_[k].R;
                MatrixXd W = -MatrixXd(sc_[k].lambda.cwiseAbs2().asDiagonal());
                W.diagonal().array() += sigma * mu;
                W -= 0.5 * (dSs * dZs + dZs * dSs);
                us[k] = lyap_diag(sc_[k].lambda, W);
            }
        }
        Dir d = direction(1.0 - sigma, ul, us, sigma * mu - tau * kappa - aff.tau * aff.kappa);
        double alpha = std::min(1.0, 0.99 * step_length(d));
        if (!(alpha > 1e-12)) {
            res.message = "step length collapsed";
            break;
        }

        v += alpha * d.v;
        s_ += alpha * d.sl;
        z_ += alpha * d.zl;
        for (int k = 0; k < nk; ++k) {
            S_[k] += alpha * d.S[k];
            Z_[k] += alpha * d.Z[k];
            S_[k] = 0.5 * (S_[k] + S_[k].transpose());
            Z_[k] = 0.5 * (Z_[k] + Z_[k].transpose());
        }
        tau += alpha * d.tau;
        kappa += alpha * d.kappa;
        if (!(tau > 0) || !(kappa > 0) || !std::isfinite(tau)) {
            res.message = "embedding variables left the cone";
            break;
        }
    }

    // No clean exit: accept the best iterate when it is nearly optimal.
    if (best.score <= std::max(1e-5, 1e3 * tol)) {
        res.status = SolveStatus::optimal;
        res.inaccurate = true;
        res.v = best.v;
        res.pobj = best.pobj;
        res.dobj = best.dobj;
        if (std::getenv("SPECTRA_VERBOSE"))
            std::clog << "spectra: warning: solution accepted at relaxed tolerance (" << best.score << ")\n";
        return res;
    }
    res.status = SolveStatus::numerical_failure;
    if (res.message.empty())
        res.message = "iteration limit";
    return res;
}

// Gauss-Jordan elimination of  E v = f.  Pivot variables are written in
// terms of the free ones: v = off + N w.
struct Elimination {
    bool consistent = true;
    std::vector<int> free_vars;        // original index of each w
    std::vector<int> pivot_row;        // per original variable: row or -1
    MatrixXd E;                        // reduced rows
    VectorXd f;
    std::vector<int> row_pivot;        // per row: pivot variable or -1
};

Elimination eliminate(int N, const std::vector<LinearEquation>& eqs)
{
    Elimination el;
    const int k = static_cast<int>(eqs.size());
    el.E = MatrixXd::Zero(k, N);
    el.f = VectorXd::Zero(k);
    for (int r = 0; r < k; ++r) {
        for (const auto& [v, a] : eqs[r].coef)
            el.E(r, v) += a;
        el.f(r) = eqs[r].rhs;
    }
    el.pivot_row.assign(N, -1);
    el.row_pivot.assign(k, -1);
    const double fscale = 1 + (k > 0 ? el.f.cwiseAbs().maxCoeff() : 0.0);
    for (int r = 0; r < k; ++r) {
        double scale = 0;
        for (const auto& [v, a] : eqs[r].coef)
            scale = std::max(scale, std::abs(a));
        int piv = -1;
        double best = 0;
        for (int j = 0; j < N; ++j)
            if (el.pivot_row[j] < 0 && std::abs(el.E(r, j)) > best) {
                best = std::abs(el.E(r, j));
                piv = j;
            }
        if (piv < 0 || best <= 1e-11 * (1 + scale)) {
            if (std::abs(el.f(r)) > 1e-9 * fscale)
                el.consistent = false;
            el.E.row(r).setZero();
            el.f(r) = 0;
            continue;
        }
        double p = el.E(r, piv);
        el.E.row(r) /= p;
        el.f(r) /= p;
        for (int o = 0; o < k; ++o) {
            if (o == r)
                continue;
            double m = el.E(o, piv);
            if (m != 0) {
                el.E.row(o) -= m * el.E.row(r);
                el.f(o) -= m * el.f(r);
            }
        }
        el.pivot_row[piv] = r;
        el.row_pivot[r] = piv;
    }
    el.E = el.E.unaryExpr([](double x) { return std::abs(x) < 1e-14 ? 0.0 : x; });
    for (int j = 0; j < N; ++j)
        if (el.pivot_row[j] < 0)
            el.free_vars.push_back(j);
    return el;
}

// Row layout of the stacked cone space: LP rows, then the upper triangle of
// each PSD block with off-diagonal entries weighted by sqrt 2, so that dot
// products match the trace inner product.
void stack_block(const MatrixXd& F, double* out)
{
    const int p = static_cast<int>(F.rows());
    for (int j = 0; j < p; ++j)
        for (int i = 0; i <= j; ++i)
            *out++ = (i == j ? 1.0 : std::sqrt(2.0)) * F(i, j);
}

int stacked_rows(const Reduced& red)
{
    int rows = static_cast<int>(red.G_lp.rows());
    for (const auto& b : red.sdp)
        rows += static_cast<int>(b.F0.rows() * (b.F0.rows() + 1) / 2);
    return rows;
}

MatrixXd stacked_operator(const Reduced& red)
{
    MatrixXd M = MatrixXd::Zero(stacked_rows(red), red.nv);
    M.topRows(red.G_lp.rows()) = MatrixXd(red.G_lp);
    int r0 = static_cast<int>(red.G_lp.rows());
    VectorXd col;
    for (const auto& b : red.sdp) {
        const int p = static_cast<int>(b.F0.rows());
        col.resize(p * (p + 1) / 2);
        for (std::size_t t = 0; t < b.vars.size(); ++t) {
            stack_block(b.F[t], col.data());
            M.col(b.vars[t]).segment(r0, col.size()) += col;
        }
        r0 += p * (p + 1) / 2;
    }
    return M;
}

VectorXd stacked_constant(const Reduced& red)
{
    VectorXd f(stacked_rows(red));
    f.head(red.h_lp.size()) = red.h_lp;
    int r0 = static_cast<int>(red.h_lp.size());
    for (const auto& b : red.sdp) {
        stack_block(b.F0, f.data() + r0);
        r0 += static_cast<int>(b.F0.rows() * (b.F0.rows() + 1) / 2);
    }
    return f;
}

// v = T (w0 + w)
struct Reparam {
    MatrixXd T;
    VectorXd w0;
};

// When the cone operator is badly conditioned (long chains of inverse maps
// produce coefficients spanning many decades), switch to variables w in which
// the operator has orthonormal columns, and move the origin to the
// least-squares point so the constant term carries no component the
// variables can cancel.  The slack space and hence the feasible set are
// unchanged.  Directions the operator cannot see are dropped; free_ray is set
// if the objective moves along one.
std::optional<Reparam> reparametrize(Reduced& red, bool& free_ray)
{
    if (red.nv == 0)
        return std::nullopt;
    const MatrixXd M = stacked_operator(red);
    VectorXd d = M.colwise().norm().transpose();
    if (d.minCoeff() <= 0)
        return std::nullopt;
    const VectorXd dinv = d.cwiseInverse();
    Eigen::BDCSVD<MatrixXd> svd(M * dinv.asDiagonal(), Eigen::ComputeThinU | Eigen::ComputeThinV);
    const VectorXd& sv = svd.singularValues();
    if (sv(sv.size() - 1) >= 1e-6 * sv(0))
        return std::nullopt;

    int r = 0;
    while (r < sv.size() && sv(r) > 1e-14 * sv(0))
        ++r;
    Reparam rp;
    rp.T = dinv.asDiagonal() * svd.matrixV().leftCols(r) * sv.head(r).cwiseInverse().asDiagonal();
    if (r < red.nv) {
        const VectorXd cn = (dinv.asDiagonal() * svd.matrixV().rightCols(red.nv - r)).transpose() * red.c;
        if (cn.cwiseAbs().maxCoeff() > 1e-9 * (1 + (rp.T.transpose() * red.c).cwiseAbs().maxCoeff()))
            free_ray = true;
    }
    rp.w0 = -svd.matrixU().leftCols(r).transpose() * stacked_constant(red);

    red.c = rp.T.transpose() * red.c;
    MatrixXd G = MatrixXd(red.G_lp) * rp.T;
    red.h_lp += G * rp.w0;
    red.G_lp = G.sparseView();
    for (auto& b : red.sdp) {
        std::vector<MatrixXd> F(r, MatrixXd::Zero(b.F0.rows(), b.F0.cols()));
        for (std::size_t t = 0; t < b.vars.size(); ++t)
            for (int k = 0; k < r; ++k)
                F[k] += rp.T(b.vars[t], k) * b.F[t];
        for (int k = 0; k < r; ++k)
            b.F0 += rp.w0(k) * F[k];
        b.F = std::move(F);
        b.vars.resize(r);
        std::iota(b.vars.begin(), b.vars.end(), 0);
    }
    red.nv = r;
    return rp;
}

} // namespace

SolveReport solve(const ConicProblem& prob, const SolverOptions& opts)
{
    using clock = std::chrono::steady_clock;
    const auto t0 = clock::now();
    SolveReport rep;
    auto finish = [&](SolveReport& r) -> SolveReport {
        r.solve_time = std::chrono::duration<double>(clock::now() - t0).count();
        if (r.status != SolveStatus::optimal)
            r.optimum = r.dual_optimum = std::numeric_limits<double>::quiet_NaN();
        return r;
    };

    const int N = prob.num_vars;
    require_dim(prob.objective.size() == N, "solve: objective length differs from num_vars");
    const double sgn = prob.sense == Sense::maximize ? -1.0 : 1.0;
    VectorXd c = sgn * prob.objective;

    // 1. components, rows, equalities
    std::vector<AffinePencil> pencils;
    for (const auto& P : prob.psd_constraints) {
        for (const auto& [v, M] : P.terms)
            require_dim(v >= 0 && v < N && M.size() == P.size(), "solve: pencil references an undeclared variable");
        if (opts.split_blocks) {
            auto parts = split_pencil(P);
            pencils.insert(pencils.end(), parts.begin(), parts.end());
        } else {
            pencils.push_back(P);
        }
    }
    std::vector<LinearEquation> eqs = prob.equality_constraints;
    for (const auto& e : eqs)
        for (const auto& [v, a] : e.coef)
            require_dim(v >= 0 && v < N, "solve: equation references an undeclared variable");
    if (opts.detect_equalities)
        pencils = extract_equalities(std::move(pencils), eqs);

    // 2. eliminate equalities: v = off + Nmap w
    Elimination el = eliminate(N, eqs);
    if (!el.consistent) {
        rep.status = SolveStatus::infeasible;
        rep.message = "inconsistent equality constraints";
        return finish(rep);
    }
    const int nf = static_cast<int>(el.free_vars.size());
    std::vector<int> free_index(N, -1);
    for (int f = 0; f < nf; ++f)
        free_index[el.free_vars[f]] = f;
    VectorXd off = VectorXd::Zero(N);
    for (int j = 0; j < N; ++j)
        if (el.pivot_row[j] >= 0)
            off(j) = el.f(el.pivot_row[j]);
    // dependence of an original variable on the free ones
    auto expand = [&](int j, std::vector<std::pair<int, double>>& out) {
        out.clear();
        if (el.pivot_row[j] < 0) {
            out.emplace_back(free_index[j], 1.0);
            return;
        }
        const int r = el.pivot_row[j];
        for (int f = 0; f < nf; ++f) {
            double e = el.E(r, el.free_vars[f]);
            if (e != 0)
                out.emplace_back(f, -e);
        }
    };

    VectorXd cw = VectorXd::Zero(nf);
    double c_off = c.dot(off);
    std::vector<std::pair<int, double>> dep;
    for (int j = 0; j < N; ++j) {
        if (c(j) == 0)
            continue;
        expand(j, dep);
        for (const auto& [f, a] : dep)
            cw(f) += a * c(j);
    }

    // 3. reduced cones
    Reduced red;
    std::vector<double> h_lp;
    std::vector<Eigen::Triplet<double>> g_lp;
    std::vector<bool> used(nf, false);
    int nrows = 0;
    for (const auto& P : pencils) {
        const int p = P.size();
        MatrixXd F0 = P.constant.dense();
        std::map<int, MatrixXd> terms;
        for (const auto& [v, M] : P.terms) {
            MatrixXd Fm = M.dense();
            if (off(v) != 0)
                F0 += off(v) * Fm;
            expand(v, dep);
            for (const auto& [f, a] : dep) {
                auto it = terms.find(f);
                if (it == terms.end())
                    terms.emplace(f, a * Fm);
                else
                    it->second += a * Fm;
            }
        }
        double scale = F0.cwiseAbs().maxCoeff();
        for (auto& [f, Fm] : terms)
            scale = std::max(scale, Fm.cwiseAbs().maxCoeff());
        for (auto it = terms.begin(); it != terms.end();) {
            if (it->second.cwiseAbs().maxCoeff() <= 1e-14 * scale)
                it = terms.erase(it);
            else
                ++it;
        }
        if (terms.empty()) {
            // constant cone
            bool ok = p == 1 ? F0(0, 0) >= -1e-9 * (1 + std::abs(F0(0, 0))) : is_psd(F0, 1e-9);
            if (!ok) {
                rep.status = SolveStatus::infeasible;
                rep.message = "constant constraint violated";
                return finish(rep);
            }
            continue;
        }
        if (p == 1) {
            h_lp.push_back(F0(0, 0));
            for (const auto& [f, Fm] : terms) {
                g_lp.emplace_back(nrows, f, Fm(0, 0));
                used[f] = true;
            }
            ++nrows;
        } else {
            DenseBlock b;
            b.F0 = std::move(F0);
            for (auto& [f, Fm] : terms) {
                b.vars.push_back(f);
                b.F.push_back(std::move(Fm));
                used[f] = true;
            }
            red.sdp.push_back(std::move(b));
        }
    }

    // 4. variables no cone sees
    bool free_ray = false;
    std::vector<int> keep, compact(nf, -1);
    for (int f = 0; f < nf; ++f) {
        if (used[f]) {
            compact[f] = static_cast<int>(keep.size());
            keep.push_back(f);
        } else if (std::abs(cw(f)) > 1e-12 * (1 + cw.cwiseAbs().maxCoeff())) {
            free_ray = true;
        }
    }
    red.nv = static_cast<int>(keep.size());
    red.c.resize(red.nv);
    for (int i = 0; i < red.nv; ++i)
        red.c(i) = cw(keep[i]);
    red.h_lp = Eigen::Map<VectorXd>(h_lp.data(), static_cast<Eigen::Index>(h_lp.size()));
    for (auto& t : g_lp)
        t = Eigen::Triplet<double>(t.row(), compact[t.col()], t.value());
    red.G_lp.resize(nrows, red.nv);
    red.G_lp.setFromTriplets(g_lp.begin(), g_lp.end());
    for (auto& b : red.sdp)
        for (int& v : b.vars)
            v = compact[v];

    const std::optional<Reparam> rp = reparametrize(red, free_ray);
    if (rp)
        c_off += red.c.dot(rp->w0);

    IpmResult ir;
    if (red.h_lp.size() == 0 && red.sdp.empty()) {
        ir.status = SolveStatus::optimal;
        ir.v = VectorXd::Zero(red.nv);
        if (red.nv > 0 && red.c.norm() > 0)
            ir.status = SolveStatus::unbounded;
    } else {
        Ipm ipm(red, opts);
        ir = ipm.run();
    }
    rep.iterations = ir.iterations;
    rep.inaccurate = ir.inaccurate;
    rep.message = ir.message;
    if (ir.status == SolveStatus::optimal && free_ray)
        ir.status = SolveStatus::unbounded;
    rep.status = ir.status;
    if (ir.status == SolveStatus::optimal) {
        const VectorXd v = rp ? VectorXd(rp->T * (rp->w0 + ir.v)) : ir.v;
        VectorXd w = VectorXd::Zero(nf);
        for (int i = 0; i < v.size(); ++i)
            w(keep[i]) = v(i);
        VectorXd x = off;
        for (int j = 0; j < N; ++j) {
            expand(j, dep);
            for (const auto& [f, a] : dep)
                x(j) += a * w(f);
        }
        rep.primal_point = x;
        rep.optimum = sgn * (ir.pobj + c_off);
        rep.dual_optimum = sgn * (ir.dobj + c_off);
    }
    return finish(rep);
}

} // namespace spectra
