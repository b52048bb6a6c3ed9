#include "spectra/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>
#include <ostream>

#include <json.hpp>

#include "spectra/conic.hpp"
#include "spectra/convert.hpp"
#include "spectra/io.hpp"
#include "spectra/reduce.hpp"
#include "spectra/validate.hpp"

namespace spectra {

using Eigen::MatrixXd;
using Eigen::Vector2d;
using Eigen::VectorXd;

namespace {

double ms_since(std::chrono::steady_clock::time_point t0)
{
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

MatrixXd uniform_matrix(int r, int c, std::mt19937_64& rng)
{
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    MatrixXd M(r, c);
    for (int j = 0; j < c; ++j)
        for (int i = 0; i < r; ++i)
            M(i, j) = u(rng);
    return M;
}

double cross(const Vector2d& o, const Vector2d& a, const Vector2d& b)
{
    return (a - o).x() * (b - o).y() - (a - o).y() * (b - o).x();
}

double polygon_area(const std::vector<Vector2d>& p)
{
    double a = 0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const auto& u = p[i];
        const auto& v = p[(i + 1) % p.size()];
        a += u.x() * v.y() - u.y() * v.x();
    }
    return 0.5 * std::abs(a);
}

std::vector<Vector2d> convex_hull_2d(std::vector<Vector2d> pts)
{
    std::sort(pts.begin(), pts.end(), [](const Vector2d& a, const Vector2d& b) {
        return a.x() != b.x() ? a.x() < b.x() : a.y() < b.y();
    });
    if (pts.size() < 3)
        return pts;
    std::vector<Vector2d> h(2 * pts.size());
    std::size_t k = 0;
    for (const auto& p : pts) {
        while (k >= 2 && cross(h[k - 2], h[k - 1], p) <= 0)
            --k;
        h[k++] = p;
    }
    for (std::size_t i = pts.size() - 1, t = k + 1; i-- > 0;) {
        while (k >= t && cross(h[k - 2], h[k - 1], pts[i]) <= 0)
            --k;
        h[k++] = pts[i];
    }
    h.resize(k - 1);
    return h;
}

// Sutherland-Hodgman against a' x <= b
std::vector<Vector2d> clip(const std::vector<Vector2d>& poly, const Vector2d& a, double b)
{
    std::vector<Vector2d> out;
    for (std::size_t i = 0; i < poly.size(); ++i) {
        const Vector2d& p = poly[i];
        const Vector2d& q = poly[(i + 1) % poly.size()];
        const double fp = a.dot(p) - b, fq = a.dot(q) - b;
        if (fp <= 0)
            out.push_back(p);
        if ((fp < 0 && fq > 0) || (fp > 0 && fq < 0))
            out.push_back(p + (q - p) * (fp / (fp - fq)));
    }
    return out;
}

struct Support {
    double h;
    VectorXd x;
};

Support support_or_throw(const Shadow& S, const VectorXd& a, const char* op)
{
    SolveReport r = solve_support(S, a);
    if (r.status == SolveStatus::unbounded)
        fail(ErrorKind::contract, std::string(op) + ": set is unbounded");
    if (!r.ok())
        fail(ErrorKind::numerical, std::string(op) + ": support solve failed (" + r.message + ")");
    return {r.optimum, r.primal_point.head(S.n())};
}

// Rejection sampler over the support bounding box.
class MemberSampler {
public:
    explicit MemberSampler(const Shadow& S) : S_(S), lo_(S.n()), hi_(S.n())
    {
        for (int i = 0; i < S.n(); ++i) {
            VectorXd e = VectorXd::Zero(S.n());
            e(i) = 1;
            hi_(i) = support_or_throw(S, e, "sample").h;
            lo_(i) = -support_or_throw(S, -e, "sample").h;
        }
    }

    VectorXd operator()(std::mt19937_64& rng) const
    {
        for (int attempt = 0; attempt < 100000; ++attempt) {
            VectorXd x = sample_box(lo_, hi_, rng);
            bool in = S_.m() == 0 ? eval_membership_fast(S_, x, VectorXd(), 0.0) : contains_point(S_, x).member;
            if (in)
                return x;
        }
        fail(ErrorKind::numerical, "sample: rejection sampling found no member");
    }

private:
    const Shadow& S_;
    VectorXd lo_, hi_;
};

} // namespace

void write_jsonl(std::ostream& os, const StepLog& log)
{
    nlohmann::json j;
    j["k"] = log.k;
    j["set_bytes"] = log.set_bytes;
    j["wall_ms"] = log.wall_ms;
    j["volume_estimate"] = log.volume_estimate ? nlohmann::json(*log.volume_estimate) : nlohmann::json(nullptr);
    j["containment_checks"] = log.containment_checks;
    j["containment_total"] = log.containment_total;
    os << j.dump() << '\n';
}

namespace {

// Lifted variables 0..n-1 of X hold u with u = x - A xi - c.  Rewrites every
// block in terms of xi instead; the set is unchanged.
Shadow lift_previous_state(const Shadow& X, const MatrixXd& A, const VectorXd& c)
{
    const int n = X.n();
    std::vector<BlockGroup> blocks;
    for (const auto& blk : X.blocks()) {
        BlockGroup g = blk;
        std::vector<std::pair<double, const SymSparse*>> lam{{1.0, &blk.lambda}};
        for (int j = 0; j < n; ++j) {
            g.a[j] = combine<double>(blk.size, {{1.0, &blk.a[j]}, {1.0, &blk.b[j]}});
            lam.emplace_back(-c(j), &blk.b[j]);
        }
        g.lambda = combine(blk.size, lam);
        for (int l = 0; l < n; ++l) {
            std::vector<std::pair<double, const SymSparse*>> t;
            for (int j = 0; j < n; ++j)
                t.emplace_back(-A(j, l), &blk.b[j]);
            g.b[l] = combine(blk.size, t);
        }
        blocks.push_back(std::move(g));
    }
    return Shadow(n, X.m(), std::move(blocks));
}

} // namespace

Shadow sme_step(const Shadow& Xk, const VectorXd& y_next, const VectorXd& u, const EstimationRun& run,
                bool check_nonempty)
{
    const LinearSystem& sys = run.system;
    const Shadow AX = translate(linear_map(Xk, sys.A), sys.B * u);
    Shadow predicted = minkowski_sum(AX, linear_map(run.W, sys.L));
    Shadow consistent = linear_inverse_map(translate(linear_map(run.V, -sys.F), y_next), sys.C);
    Shadow X = intersect(predicted, consistent);
    // With A invertible the sum's lifted u equals x - A x_k - B u.  Carrying
    // x_k instead keeps powers of A^{-1} out of older blocks.
    if (AX.m() == Xk.m())
        X = lift_previous_state(X, sys.A, sys.B * u);
    if (check_nonempty && is_empty(X).empty)
        fail(ErrorKind::contract, "sme_step: measurement is inconsistent with the model (empty estimate)");
    return X;
}

Shadow reach_step(const Shadow& Xk, const Shadow& Uk, const MatrixXd& A, const MatrixXd& B)
{
    return minkowski_sum(linear_map(Xk, A), linear_map(Uk, B));
}

LpInitialSets build_lp_initial_sets(const ReachRun& run)
{
    auto fold = [](const std::vector<MatrixXd>& shapes, const Rational& p, const VectorXd& center) {
        if (shapes.empty())
            fail(ErrorKind::contract, "build_lp_initial_sets: at least one ellipsoid per set required");
        const VectorXd zero = VectorXd::Zero(center.size());
        Shadow S = from_ellipsoid({zero, shapes[0]});
        for (std::size_t i = 1; i < shapes.size(); ++i)
            S = lp_sum(S, from_ellipsoid({zero, shapes[i]}), p);
        return translate(S, center);
    };
    return {fold(run.Q_list, run.p1, run.x_bar0), fold(run.U_list, run.p2, run.u_bar)};
}

VolumeEstimate estimate_volume(const Shadow& S, int k_dirs, std::uint64_t seed, int samples)
{
    const int n = S.n();
    if (n != 2 && n != 3)
        fail(ErrorKind::contract, "estimate_volume: only n = 2 or n = 3 supported");
    VolumeEstimate est;
    if (n == 2) {
        require_dim(k_dirs >= 3, "estimate_volume: at least three directions required");
        const DirectionSet dirs = uniform_directions(2, k_dirs, seed);
        std::vector<Vector2d> inner;
        std::vector<std::pair<Vector2d, double>> faces;
        double hmax = 0;
        for (const auto& a : dirs.vectors) {
            Support s = support_or_throw(S, a, "estimate_volume");
            inner.emplace_back(s.x(0), s.x(1));
            faces.emplace_back(Vector2d(a(0), a(1)), s.h);
            hmax = std::max(hmax, std::abs(s.h));
        }
        const double R = 10 * (hmax + 1);
        std::vector<Vector2d> outer{{-R, -R}, {R, -R}, {R, R}, {-R, R}};
        for (const auto& [a, h] : faces)
            outer = clip(outer, a, h);
        const double ai = polygon_area(convex_hull_2d(inner));
        const double ao = polygon_area(outer);
        double diam = 0;
        for (const auto& p : inner)
            for (const auto& q : inner)
                diam = std::max(diam, (p - q).norm());
        if (ai <= 1e-6 * (diam * diam + 1e-12)) {
            est.degenerate = true;
            est.value = ai;
            est.error = 0.5 * std::max(0.0, ao - ai);
            return est;
        }
        est.value = 0.5 * (ai + ao);
        est.error = 0.5 * std::max(0.0, ao - ai);
        return est;
    }
    std::mt19937_64 rng(seed);
    VectorXd lo(3), hi(3);
    for (int i = 0; i < 3; ++i) {
        VectorXd e = VectorXd::Zero(3);
        e(i) = 1;
        hi(i) = support_or_throw(S, e, "estimate_volume").h;
        lo(i) = -support_or_throw(S, -e, "estimate_volume").h;
    }
    const double box = (hi - lo).prod();
    int hits = 0;
    for (int k = 0; k < samples; ++k) {
        VectorXd x = sample_box(lo, hi, rng);
        if (S.m() == 0 ? eval_membership_fast(S, x, VectorXd()) : contains_point(S, x).member)
            ++hits;
    }
    const double frac = static_cast<double>(hits) / samples;
    est.value = box * frac;
    est.error = 1.96 * box * std::sqrt(frac * (1 - frac) / samples);
    est.degenerate = hits == 0;
    return est;
}

LinearSystem random_system(int d, std::uint64_t seed)
{
    require_dim(d >= 1, "random_system: dimension must be positive");
    std::mt19937_64 rng(seed);
    const int ny = (d + 1) / 2;
    LinearSystem sys;
    sys.A = uniform_matrix(d, d, rng);
    std::uniform_real_distribution<double> rho(0.7, 1.05);
    const double r = sys.A.eigenvalues().cwiseAbs().maxCoeff();
    sys.A *= rho(rng) / std::max(r, 1e-12);
    sys.B = uniform_matrix(d, 1, rng);
    sys.L = uniform_matrix(d, d, rng);
    do {
        sys.C = uniform_matrix(ny, d, rng);
    } while (Eigen::FullPivLU<MatrixXd>(sys.C).rank() < std::min(ny, d));
    sys.F = uniform_matrix(ny, ny, rng);
    return sys;
}

EstimationRun random_estimation_run(int d, int horizon, std::optional<int> reduce_every, std::uint64_t seed)
{
    LinearSystem sys = random_system(d, seed);
    const int nv = static_cast<int>(sys.F.cols());
    Shadow box = from_zonotope({VectorXd::Zero(d), MatrixXd::Identity(d, d)});
    Shadow ball = from_ellipsoid({VectorXd::Zero(nv), 0.25 * MatrixXd::Identity(nv, nv)});
    return EstimationRun{sys, box, box, ball, horizon, reduce_every, 10, seed};
}

std::vector<Vector2d> emit_plot_data(const Shadow& S, int k_dirs)
{
    if (S.n() != 2)
        fail(ErrorKind::contract, "emit_plot_data: only n = 2 supported");
    std::vector<Vector2d> pts;
    for (const auto& a : uniform_directions(2, k_dirs).vectors) {
        Support s = support_or_throw(S, a, "emit_plot_data");
        pts.emplace_back(s.x(0), s.x(1));
    }
    return pts;
}

void write_plot_csv(std::ostream& os, const std::vector<Vector2d>& pts)
{
    os << "x,y\n";
    os.precision(17);
    for (const auto& p : pts)
        os << p.x() << ',' << p.y() << '\n';
}

EstimationResult run_estimation(const EstimationRun& run, std::ostream* log, bool with_volume)
{
    const LinearSystem& sys = run.system;
    std::mt19937_64 rng(run.seed ^ 0x9e3779b97f4a7c15ULL);
    const MemberSampler x0s(run.X0), ws(run.W), vs(run.V);

    EstimationResult res;
    VectorXd x = x0s(rng);
    Shadow X = run.X0;
    auto record = [&](int k, double ms, bool checked, bool ok) {
        StepLog l;
        l.k = k;
        l.set_bytes = set_bytes(X);
        l.wall_ms = ms;
        if (with_volume && X.n() <= 3)
            l.volume_estimate = estimate_volume(X, 64, run.seed).value;
        l.containment_total = checked ? 1 : 0;
        l.containment_checks = ok ? 1 : 0;
        res.logs.push_back(l);
        if (log)
            write_jsonl(*log, l);
    };
    res.true_states.push_back(x);
    record(0, 0.0, false, false);
    for (int k = 0; k < run.horizon; ++k) {
        const auto t0 = std::chrono::steady_clock::now();
        VectorXd u = VectorXd::Constant(sys.B.cols(), std::sin(0.3 * k));
        x = sys.A * x + sys.B * u + sys.L * ws(rng);
        VectorXd y = sys.C * x + sys.F * vs(rng);
        const bool reduce_now = run.reduce_every && *run.reduce_every > 0 && k > 0 && k % *run.reduce_every == 0;
        const Shadow from = reduce_now ? polyhedral_approx(X, run.reduce_target, run.seed) : X;
        X = sme_step(from, y, u, run, false);
        const double ms = ms_since(t0);
        const bool ok = contains_point(X, x).member;
        res.contained += ok ? 1 : 0;
        res.true_states.push_back(x);
        record(k + 1, ms, true, ok);
    }
    return res;
}

ReachResult run_reach(const ReachRun& run, int samples, std::uint64_t seed, std::ostream* log)
{
    std::mt19937_64 rng(seed);
    LpInitialSets init = build_lp_initial_sets(run);
    ReachResult res;
    res.sets.push_back(init.X0);
    std::vector<VectorXd> traj(samples);
    for (auto& x : traj)
        x = run.x_bar0 + sample_lp_sum(run.Q_list, run.p1, rng);

    auto check = [&](const Shadow& X, StepLog& l) {
        l.containment_total = samples;
        for (const auto& x : traj)
            l.containment_checks += contains_point(X, x).member ? 1 : 0;
    };
    StepLog l0;
    l0.set_bytes = set_bytes(init.X0);
    check(init.X0, l0);
    res.logs.push_back(l0);
    if (log)
        write_jsonl(*log, l0);
    for (int k = 0; k < run.horizon; ++k) {
        const auto t0 = std::chrono::steady_clock::now();
        Shadow X = reach_step(res.sets.back(), init.U, run.A, run.B);
        StepLog l;
        l.k = k + 1;
        l.wall_ms = ms_since(t0);
        l.set_bytes = set_bytes(X);
        for (auto& x : traj)
            x = run.A * x + run.B * (run.u_bar + sample_lp_sum(run.U_list, run.p2, rng));
        check(X, l);
        res.sets.push_back(std::move(X));
        res.logs.push_back(l);
        if (log)
            write_jsonl(*log, l);
    }
    return res;
}

VectorXd sample_box(const VectorXd& lo, const VectorXd& hi, std::mt19937_64& rng)
{
    std::uniform_real_distribution<double> u(0.0, 1.0);
    VectorXd x(lo.size());
    for (int i = 0; i < lo.size(); ++i)
        x(i) = lo(i) + (hi(i) - lo(i)) * u(rng);
    return x;
}

VectorXd sample_ellipsoid(const MatrixXd& Q, std::mt19937_64& rng)
{
    const int n = static_cast<int>(Q.rows());
    std::normal_distribution<double> g;
    std::uniform_real_distribution<double> u(0.0, 1.0);
    VectorXd z(n);
    for (int i = 0; i < n; ++i)
        z(i) = g(rng);
    z *= std::pow(u(rng), 1.0 / n) / z.norm();
    Eigen::LLT<MatrixXd> llt(Q);
    return llt.matrixL() * z;
}

namespace {

// 1/p' = 1 - 1/p
double conj_exponent(const Rational& p)
{
    if (p.infinite)
        return 1.0;
    return 1.0 - 1.0 / p.value();
}

} // namespace

VectorXd sample_lp_sum(const std::vector<MatrixXd>& shapes, const Rational& p, std::mt19937_64& rng)
{
    std::uniform_real_distribution<double> u(0.0, 1.0);
    VectorXd x = sample_ellipsoid(shapes.at(0), rng);
    const double e = conj_exponent(p);
    for (std::size_t i = 1; i < shapes.size(); ++i) {
        VectorXd y = sample_ellipsoid(shapes[i], rng);
        const double t = u(rng);
        if (p.infinite)
            x = t * x + (1 - t) * y;
        else
            x = std::pow(t, e) * x + std::pow(1 - t, e) * y;
    }
    return x;
}

VectorXd lp_sum_maximizer(const std::vector<MatrixXd>& shapes, const Rational& p, const VectorXd& a)
{
    auto ell = [&](const MatrixXd& Q) -> std::pair<double, VectorXd> {
        const double h = std::sqrt(a.dot(Q * a));
        if (h == 0)
            return {0.0, VectorXd::Zero(a.size())};
        return {h, Q * a / h};
    };
    auto [H, x] = ell(shapes.at(0));
    const double e = conj_exponent(p);
    for (std::size_t i = 1; i < shapes.size(); ++i) {
        auto [h, y] = ell(shapes[i]);
        if (p.infinite) {
            if (h > H)
                H = h, x = y;
            continue;
        }
        const double pv = p.value();
        const double Hn = std::pow(std::pow(H, pv) + std::pow(h, pv), 1.0 / pv);
        if (Hn == 0)
            continue;
        const double t = std::pow(H / Hn, pv);
        x = std::pow(t, e) * x + std::pow(1 - t, e) * y;
        H = Hn;
    }
    return x;
}

Shadow random_spectrahedron(int n, int size, std::uint64_t seed)
{
    require_dim(n >= 1 && size >= 1, "random_spectrahedron: positive dimensions required");
    for (std::uint64_t attempt = 0;; ++attempt) {
        std::mt19937_64 rng(seed * 7919 + attempt);
        std::normal_distribution<double> g;
        BlockGroup blk;
        blk.size = size;
        blk.lambda = SymSparse::identity(size);
        for (int i = 0; i < n; ++i) {
            MatrixXd M(size, size);
            for (int c = 0; c < size; ++c)
                for (int r = 0; r <= c; ++r)
                    M(r, c) = M(c, r) = g(rng) / std::sqrt(static_cast<double>(size));
            blk.a.push_back(SymSparse::from_dense(M));
        }
        Shadow S(n, 0, {std::move(blk)});
        if (is_bounded(S).bounded)
            return S;
    }
}

} // namespace spectra
