#include "spectra/ops.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "spectra/conic.hpp"
#include "spectra/validate.hpp"

namespace spectra {

using Eigen::MatrixXd;
using Eigen::VectorXd;

Rational Rational::parse(const std::string& text)
{
    if (text == "inf" || text == "infinity" || text == "Inf")
        return inf();
    Rational r;
    auto slash = text.find('/');
    try {
        std::size_t used = 0;
        if (slash == std::string::npos) {
            r.num = std::stoll(text, &used);
            r.den = 1;
            if (used != text.size())
                throw std::invalid_argument(text);
        } else {
            r.num = std::stoll(text.substr(0, slash), &used);
            if (used != slash)
                throw std::invalid_argument(text);
            std::string d = text.substr(slash + 1);
            r.den = std::stoll(d, &used);
            if (used != d.size())
                throw std::invalid_argument(text);
        }
    } catch (const std::exception&) {
        fail(ErrorKind::contract, "exponent must be a rational 'a/b', an integer or 'inf': " + text);
    }
    if (r.num <= 0 || r.den <= 0)
        fail(ErrorKind::contract, "exponent must be positive: " + text);
    long long g = std::gcd(r.num, r.den);
    r.num /= g;
    r.den /= g;
    return r;
}

double Rational::value() const { return infinite ? INFINITY : static_cast<double>(num) / static_cast<double>(den); }

std::string Rational::str() const
{
    if (infinite)
        return "inf";
    return den == 1 ? std::to_string(num) : std::to_string(num) + "/" + std::to_string(den);
}

namespace {

using Entries = std::vector<SymSparse::Entry>;

SymSparse summed(int size, Entries e)
{
    std::sort(e.begin(), e.end(), [](const auto& a, const auto& b) {
        return a.col != b.col ? a.col < b.col : a.row < b.row;
    });
    Entries out;
    for (const auto& x : e) {
        if (!out.empty() && out.back().row == x.row && out.back().col == x.col)
            out.back().value += x.value;
        else
            out.push_back(x);
    }
    out.erase(std::remove_if(out.begin(), out.end(), [](const auto& x) { return x.value == 0.0; }), out.end());
    return SymSparse(size, std::move(out));
}

// One block assembled from pieces placed at offsets.
struct BlockBuilder {
    int size;
    Entries lam;
    std::vector<Entries> a, b;

    BlockBuilder(int s, int n, int m) : size(s), a(n), b(m) {}

    static void put(Entries& dst, const SymSparse& M, int off, double w = 1.0)
    {
        for (const auto& e : M.entries())
            dst.push_back({e.row + off, e.col + off, w * e.value});
    }
    static void put_diag(Entries& dst, int pos, double v) { dst.push_back({pos, pos, v}); }

    BlockGroup build() const
    {
        BlockGroup g;
        g.size = size;
        g.lambda = summed(size, lam);
        for (const auto& e : a)
            g.a.push_back(summed(size, e));
        for (const auto& e : b)
            g.b.push_back(summed(size, e));
        return g;
    }
};

SymSparse lincomb(int size, const std::vector<SymSparse>& mats, const VectorXd& w)
{
    std::vector<std::pair<double, const SymSparse*>> terms;
    for (int i = 0; i < w.size(); ++i)
        if (w(i) != 0)
            terms.emplace_back(w(i), &mats[i]);
    return combine(size, terms);
}

void require_nonempty(const Shadow& S, const char* op)
{
    auto r = is_empty(S);
    if (r.empty)
        fail(ErrorKind::contract, std::string(op) + ": input set is empty");
}

bool exactness(const Shadow& S)
{
    if (contains_point(S, VectorXd::Zero(S.n())).member)
        return true;
    return is_bounded(S).bounded;
}

// Lambda + sum y*_j B_j at a point y* that puts the origin in the interior
// of the lifted slice (when it has one).
std::vector<SymSparse> interior_lambda(const Shadow& S)
{
    std::vector<SymSparse> out;
    if (S.m() == 0) {
        for (const auto& blk : S.blocks())
            out.push_back(blk.lambda);
        return out;
    }
    SolveReport r = solve_feasibility_margin(S, VectorXd::Zero(S.n()));
    if (!r.ok())
        fail(ErrorKind::numerical, "lp_sum: interior point solve failed (" + std::string(to_string(r.status)) + ")");
    VectorXd y = r.primal_point.tail(S.m());
    for (const auto& blk : S.blocks()) {
        std::vector<std::pair<double, const SymSparse*>> t{{1.0, &blk.lambda}};
        for (int j = 0; j < S.m(); ++j)
            t.emplace_back(y(j), &blk.b[j]);
        out.push_back(combine(blk.size, t));
    }
    return out;
}

} // namespace

Shadow translate(const Shadow& S, const VectorXd& b)
{
    require_dim(b.size() == S.n(), "translate: vector has wrong length");
    std::vector<BlockGroup> blocks;
    for (const auto& blk : S.blocks()) {
        BlockGroup g = blk;
        g.lambda = combine(blk.size, [&] {
            std::vector<std::pair<double, const SymSparse*>> t{{1.0, &blk.lambda}};
            for (int i = 0; i < S.n(); ++i)
                t.emplace_back(-b(i), &blk.a[i]);
            return t;
        }());
        blocks.push_back(std::move(g));
    }
    return Shadow(S.n(), S.m(), std::move(blocks));
}

Shadow linear_map(const Shadow& S, const MatrixXd& T)
{
    require_dim(T.cols() == S.n(), "linear_map: matrix must have n columns");
    const int l = static_cast<int>(T.rows()), n = S.n(), m = S.m();
    require_dim(l >= 1, "linear_map: matrix must have at least one row");
    Eigen::JacobiSVD<MatrixXd> svd(T, Eigen::ComputeFullU | Eigen::ComputeFullV);
    if (svd.info() != Eigen::Success)
        fail(ErrorKind::numerical, "linear_map: SVD failed");
    const VectorXd& sv = svd.singularValues();
    const double smax = sv.size() > 0 ? sv(0) : 0.0;
    int r = 0;
    while (r < sv.size() && sv(r) > kRankCutoff * smax)
        ++r;

    if (l == n && r == n) {
        // y = T x:  A'_j = sum_i (T^{-1})_{ij} A_i
        MatrixXd Ti = T.inverse();
        std::vector<BlockGroup> blocks;
        for (const auto& blk : S.blocks()) {
            BlockGroup g = blk;
            for (int j = 0; j < n; ++j)
                g.a[j] = lincomb(blk.size, blk.a, Ti.col(j));
            blocks.push_back(std::move(g));
        }
        return Shadow(n, m, std::move(blocks));
    }

    const MatrixXd& U = svd.matrixU();
    const MatrixXd& V = svd.matrixV();
    const int mn = m + n - r;
    std::vector<BlockGroup> blocks;
    for (const auto& blk : S.blocks()) {
        // A^V_k = sum_j V_{jk} A_j
        std::vector<SymSparse> av(n);
        for (int k = 0; k < n; ++k)
            av[k] = lincomb(blk.size, blk.a, V.col(k));
        BlockGroup g;
        g.size = blk.size;
        g.lambda = blk.lambda;
        for (int j = 0; j < l; ++j) {
            VectorXd w = VectorXd::Zero(n);
            for (int i = 0; i < r; ++i)
                w(i) = U(j, i) / sv(i);
            g.a.push_back(lincomb(blk.size, av, w));
        }
        g.b = blk.b;
        for (int k = r; k < n; ++k)
            g.b.push_back(av[k]);
        blocks.push_back(std::move(g));
    }
    if (l > r) {
        // U_{:, r:}' y = 0 as +/- pairs
        const int e = l - r;
        BlockBuilder bb(2 * e, l, mn);
        for (int j = 0; j < l; ++j)
            for (int k = 0; k < e; ++k) {
                const double u = U(j, r + k);
                if (u != 0) {
                    BlockBuilder::put_diag(bb.a[j], k, u);
                    BlockBuilder::put_diag(bb.a[j], e + k, -u);
                }
            }
        blocks.push_back(bb.build());
    }
    return Shadow(l, mn, std::move(blocks));
}

Shadow linear_inverse_map(const Shadow& S, const MatrixXd& T)
{
    require_dim(T.rows() == S.n(), "linear_inverse_map: matrix must have n rows");
    const int l = static_cast<int>(T.cols());
    std::vector<BlockGroup> blocks;
    for (const auto& blk : S.blocks()) {
        BlockGroup g;
        g.size = blk.size;
        g.lambda = blk.lambda;
        g.b = blk.b;
        for (int j = 0; j < l; ++j)
            g.a.push_back(lincomb(blk.size, blk.a, T.col(j)));
        blocks.push_back(std::move(g));
    }
    return Shadow(l, S.m(), std::move(blocks));
}

Shadow minkowski_sum(const Shadow& S1, const Shadow& S2)
{
    require_dim(S1.n() == S2.n(), "minkowski_sum: ambient dimensions differ");
    const int n = S1.n(), m1 = S1.m(), m2 = S2.m();
    const int mt = n + m1 + m2;
    // x = (x - u) + u  with  x - u in S1,  u in S2;  lifted order (u, y, v)
    std::vector<BlockGroup> blocks;
    for (const auto& blk : S1.blocks()) {
        BlockGroup g;
        g.size = blk.size;
        g.lambda = blk.lambda;
        g.a = blk.a;
        for (int i = 0; i < n; ++i)
            g.b.push_back(lincomb(blk.size, {blk.a[i]}, VectorXd::Constant(1, -1.0)));
        for (int j = 0; j < m1; ++j)
            g.b.push_back(blk.b[j]);
        for (int j = 0; j < m2; ++j)
            g.b.push_back(SymSparse(blk.size));
        blocks.push_back(std::move(g));
    }
    for (const auto& blk : S2.blocks()) {
        BlockGroup g;
        g.size = blk.size;
        g.lambda = blk.lambda;
        g.a.assign(n, SymSparse(blk.size));
        for (int i = 0; i < n; ++i)
            g.b.push_back(blk.a[i]);
        for (int j = 0; j < m1; ++j)
            g.b.push_back(SymSparse(blk.size));
        for (int j = 0; j < m2; ++j)
            g.b.push_back(blk.b[j]);
        blocks.push_back(std::move(g));
    }
    return Shadow(n, mt, std::move(blocks));
}

Shadow intersect(const Shadow& S1, const Shadow& S2)
{
    require_dim(S1.n() == S2.n(), "intersect: ambient dimensions differ");
    std::vector<Shadow> in{S1, S2};
    return diag_concat(in, MergePlan::shared_x(in));
}

Shadow cartesian_product(const Shadow& S1, const Shadow& S2)
{
    std::vector<Shadow> in{S1, S2};
    return diag_concat(in, MergePlan::disjoint(in));
}

Shadow lp_sum(const Shadow& S1, const Shadow& S2, const Rational& p)
{
    require_dim(S1.n() == S2.n(), "lp_sum: ambient dimensions differ");
    if (p.infinite)
        return convex_hull(S1, S2).set;
    if (p.den <= 0 || p.num < p.den)
        fail(ErrorKind::contract, "lp_sum: p must be a rational >= 1");
    const VectorXd zero = VectorXd::Zero(S1.n());
    if (!contains_point(S1, zero).member || !contains_point(S2, zero).member)
        fail(ErrorKind::contract, "lp_sum: both sets must contain the origin");

    const int n = S1.n(), m1 = S1.m(), m2 = S2.m();
    // q = 1 - 1/p
    const Shadow sq = build_sq_set(SqSetParams::from_fraction(p.num - p.den, p.num));
    const int mq = sq.m();
    const int mt = 4 + n + m1 + m2 + 2 * mq;
    const int U0 = 4, Y0 = U0 + n, V0 = Y0 + m1, Q1 = V0 + m2, Q2 = Q1 + mq;

    std::vector<BlockGroup> blocks;
    {
        // t1 + t2 = 1
        BlockBuilder bb(2, n, mt);
        bb.lam = {{0, 0, 1.0}, {1, 1, -1.0}};
        for (int k : {0, 1})
            bb.b[k] = {{0, 0, -1.0}, {1, 1, 1.0}};
        blocks.push_back(bb.build());
    }
    const auto lam1 = interior_lambda(S1);
    const auto lam2 = interior_lambda(S2);
    for (std::size_t k = 0; k < S1.blocks().size(); ++k) {
        const auto& blk = S1.blocks()[k];
        BlockGroup g;
        g.size = blk.size;
        g.lambda = SymSparse(blk.size);
        g.a = blk.a;
        g.b.assign(mt, SymSparse(blk.size));
        g.b[2] = lam1[k];
        for (int i = 0; i < n; ++i)
            g.b[U0 + i] = lincomb(blk.size, {blk.a[i]}, VectorXd::Constant(1, -1.0));
        for (int j = 0; j < m1; ++j)
            g.b[Y0 + j] = blk.b[j];
        blocks.push_back(std::move(g));
    }
    for (std::size_t k = 0; k < S2.blocks().size(); ++k) {
        const auto& blk = S2.blocks()[k];
        BlockGroup g;
        g.size = blk.size;
        g.lambda = SymSparse(blk.size);
        g.a.assign(n, SymSparse(blk.size));
        g.b.assign(mt, SymSparse(blk.size));
        g.b[3] = lam2[k];
        for (int i = 0; i < n; ++i)
            g.b[U0 + i] = blk.a[i];
        for (int j = 0; j < m2; ++j)
            g.b[V0 + j] = blk.b[j];
        blocks.push_back(std::move(g));
    }
    // (t1, t3) and (t2, t4) in S(q)
    auto place_sq = [&](int first, int second, int qoff) {
        for (const auto& blk : sq.blocks()) {
            BlockGroup g;
            g.size = blk.size;
            g.lambda = blk.lambda;
            g.a.assign(n, SymSparse(blk.size));
            g.b.assign(mt, SymSparse(blk.size));
            g.b[first] = blk.a[0];
            g.b[second] = blk.a[1];
            for (int j = 0; j < mq; ++j)
                g.b[qoff + j] = blk.b[j];
            blocks.push_back(std::move(g));
        }
    };
    place_sq(0, 2, Q1);
    place_sq(1, 3, Q2);
    return Shadow(n, mt, std::move(blocks));
}

HullResult conic_hull(const Shadow& S)
{
    require_nonempty(S, "conic_hull");
    const int n = S.n(), m = S.m();
    std::vector<BlockGroup> blocks;
    for (const auto& blk : S.blocks()) {
        BlockGroup g;
        g.size = blk.size;
        g.lambda = SymSparse(blk.size);
        g.a = blk.a;
        g.b = blk.b;
        g.b.push_back(blk.lambda);
        blocks.push_back(std::move(g));
    }
    BlockBuilder bb(1, n, m + 1);
    bb.b[m] = {{0, 0, 1.0}};
    blocks.push_back(bb.build());
    return {Shadow(n, m + 1, std::move(blocks)), exactness(S)};
}

HullResult convex_hull(const Shadow& S1, const Shadow& S2)
{
    require_dim(S1.n() == S2.n(), "convex_hull: ambient dimensions differ");
    require_nonempty(S1, "convex_hull");
    require_nonempty(S2, "convex_hull");
    const int n = S1.n(), m1 = S1.m(), m2 = S2.m();
    const int mt = 1 + n + m1 + m2;
    // x = w + (x - w),  w in t S1,  x - w in (1 - t) S2;  lifted order (t, w, y, v)
    std::vector<BlockGroup> blocks;
    {
        BlockBuilder bb(2, n, mt);
        bb.lam = {{0, 0, 1.0}};
        bb.b[0] = {{0, 0, -1.0}, {1, 1, 1.0}};
        blocks.push_back(bb.build());
    }
    for (const auto& blk : S1.blocks()) {
        BlockGroup g;
        g.size = blk.size;
        g.lambda = SymSparse(blk.size);
        g.a.assign(n, SymSparse(blk.size));
        g.b.assign(mt, SymSparse(blk.size));
        g.b[0] = blk.lambda;
        for (int i = 0; i < n; ++i)
            g.b[1 + i] = blk.a[i];
        for (int j = 0; j < m1; ++j)
            g.b[1 + n + j] = blk.b[j];
        blocks.push_back(std::move(g));
    }
    for (const auto& blk : S2.blocks()) {
        BlockGroup g;
        g.size = blk.size;
        g.lambda = blk.lambda;
        g.a = blk.a;
        g.b.assign(mt, SymSparse(blk.size));
        g.b[0] = lincomb(blk.size, {blk.lambda}, VectorXd::Constant(1, -1.0));
        for (int i = 0; i < n; ++i)
            g.b[1 + i] = lincomb(blk.size, {blk.a[i]}, VectorXd::Constant(1, -1.0));
        for (int j = 0; j < m2; ++j)
            g.b[1 + n + m1 + j] = blk.b[j];
        blocks.push_back(std::move(g));
    }
    bool exact = is_bounded(S1).bounded && is_bounded(S2).bounded;
    return {Shadow(n, mt, std::move(blocks)), exact};
}

HullResult polytopic_map(const Shadow& S, const PolytopicMap& M)
{
    const int h = static_cast<int>(M.vertices.size());
    if (h < 1)
        fail(ErrorKind::contract, "polytopic_map: at least one vertex matrix required");
    const int l = static_cast<int>(M.vertices[0].rows());
    for (const auto& T : M.vertices)
        require_dim(T.rows() == l && T.cols() == S.n(), "polytopic_map: vertex matrices must all be l x n");
    require_nonempty(S, "polytopic_map");

    std::vector<Shadow> images;
    for (const auto& T : M.vertices)
        images.push_back(linear_map(S, T));
    // lifted order: t (h), u^2..u^h (l each), then the lifted variables of each image
    std::vector<int> v0(h);
    int mt = h + l * (h - 1);
    for (int i = 0; i < h; ++i) {
        v0[i] = mt;
        mt += images[i].m();
    }
    auto u_index = [&](int i, int j) { return h + l * (i - 1) + j; };

    std::vector<BlockGroup> blocks;
    for (int i = 0; i < h; ++i) {
        for (const auto& blk : images[i].blocks()) {
            BlockGroup g;
            g.size = blk.size;
            g.lambda = SymSparse(blk.size);
            g.a.assign(l, SymSparse(blk.size));
            g.b.assign(mt, SymSparse(blk.size));
            g.b[i] = blk.lambda;
            if (i == 0) {
                // x - sum_{k>=2} u^k
                g.a = blk.a;
                for (int k = 1; k < h; ++k)
                    for (int j = 0; j < l; ++j)
                        g.b[u_index(k, j)] = lincomb(blk.size, {blk.a[j]}, VectorXd::Constant(1, -1.0));
            } else {
                for (int j = 0; j < l; ++j)
                    g.b[u_index(i, j)] = blk.a[j];
            }
            for (int j = 0; j < images[i].m(); ++j)
                g.b[v0[i] + j] = blk.b[j];
            blocks.push_back(std::move(g));
        }
    }
    {
        // t_i >= 0 and sum t_i = 1
        BlockBuilder bb(h + 2, l, mt);
        bb.lam = {{h, h, 1.0}, {h + 1, h + 1, -1.0}};
        for (int i = 0; i < h; ++i)
            bb.b[i] = {{i, i, 1.0}, {h, h, -1.0}, {h + 1, h + 1, 1.0}};
        blocks.push_back(bb.build());
    }
    return {Shadow(l, mt, std::move(blocks)), exactness(S)};
}

} // namespace spectra
