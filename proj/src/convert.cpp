#include "spectra/convert.hpp"

#include <numeric>

#include "spectra/validate.hpp"

namespace spectra {

using Eigen::MatrixXd;
using Eigen::VectorXd;

Shadow from_hpolyhedron(const HPolyhedron& P)
{
    const int nc = static_cast<int>(P.A.rows()), n = static_cast<int>(P.A.cols());
    require_dim(P.b.size() == nc, "from_hpolyhedron: A and b disagree on the number of rows");
    require_dim(nc >= 1, "from_hpolyhedron: at least one inequality required");
    BlockGroup g;
    g.size = nc;
    g.lambda = SymSparse::diagonal(std::vector<double>(P.b.data(), P.b.data() + nc));
    for (int i = 0; i < n; ++i) {
        VectorXd col = -P.A.col(i);
        g.a.push_back(SymSparse::diagonal(std::vector<double>(col.data(), col.data() + nc)));
    }
    return Shadow(n, 0, {std::move(g)});
}

Shadow from_ellipsoid(const Ellipsoid& E)
{
    const int n = static_cast<int>(E.c.size());
    require_dim(E.Q.rows() == n && E.Q.cols() == n, "from_ellipsoid: Q must be n x n");
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(E.Q, Eigen::EigenvaluesOnly);
    if (!(es.eigenvalues()(0) > 0))
        fail(ErrorKind::contract, "from_ellipsoid: Q must be positive definite");
    // [[Q, x - c], [(x - c)', 1]] >= 0
    MatrixXd L = MatrixXd::Zero(n + 1, n + 1);
    L.topLeftCorner(n, n) = 0.5 * (E.Q + E.Q.transpose());
    L.topRightCorner(n, 1) = -E.c;
    L.bottomLeftCorner(1, n) = -E.c.transpose();
    L(n, n) = 1;
    BlockGroup g;
    g.size = n + 1;
    g.lambda = SymSparse::from_dense(L);
    for (int i = 0; i < n; ++i)
        g.a.push_back(SymSparse(n + 1, {{i, n, 1.0}}));
    return Shadow(n, 0, {std::move(g)});
}

namespace {

Shadow unit_box(int dim)
{
    HPolyhedron P;
    P.A.resize(2 * dim, dim);
    P.A << MatrixXd::Identity(dim, dim), -MatrixXd::Identity(dim, dim);
    P.b = VectorXd::Ones(2 * dim);
    return from_hpolyhedron(P);
}

} // namespace

Shadow from_zonotope(const Zonotope& Z)
{
    require_dim(Z.G.rows() == Z.c.size(), "from_zonotope: G must have n rows");
    require_dim(Z.G.cols() >= 1, "from_zonotope: at least one generator required");
    return translate(linear_map(unit_box(static_cast<int>(Z.G.cols())), Z.G), Z.c);
}

Shadow from_pnorm_ball(int dim, const Rational& p)
{
    require_dim(dim >= 1, "from_pnorm_ball: dim must be positive");
    if (p.infinite)
        return unit_box(dim);
    if (p.num < p.den)
        fail(ErrorKind::contract, "from_pnorm_ball: p must be >= 1");
    // |x_i|^p <= t_i,  sum t <= 1:  w_i >= |x_i|,  (t_i, w_i) in S(1/p)
    const Shadow sq = build_sq_set(SqSetParams::from_fraction(p.den, p.num));
    const int mq = sq.m();
    const int m = 2 * dim + dim * mq;
    auto t_of = [](int i) { return i; };
    auto w_of = [dim](int i) { return dim + i; };

    std::vector<BlockGroup> blocks;
    {
        const int s = 1 + 2 * dim;
        std::vector<std::vector<SymSparse::Entry>> a(dim), b(m);
        for (int i = 0; i < dim; ++i) {
            b[t_of(i)].push_back({0, 0, -1.0});
            b[w_of(i)].push_back({1 + i, 1 + i, 1.0});
            b[w_of(i)].push_back({1 + dim + i, 1 + dim + i, 1.0});
            a[i].push_back({1 + i, 1 + i, -1.0});
            a[i].push_back({1 + dim + i, 1 + dim + i, 1.0});
        }
        BlockGroup g;
        g.size = s;
        g.lambda = SymSparse(s, {{0, 0, 1.0}});
        for (auto& e : a)
            g.a.push_back(SymSparse(s, std::move(e)));
        for (auto& e : b)
            g.b.push_back(SymSparse(s, std::move(e)));
        blocks.push_back(std::move(g));
    }
    for (int i = 0; i < dim; ++i) {
        for (const auto& qb : sq.blocks()) {
            BlockGroup g;
            g.size = qb.size;
            g.lambda = qb.lambda;
            g.a.assign(dim, SymSparse(qb.size));
            g.b.assign(m, SymSparse(qb.size));
            g.b[t_of(i)] = qb.a[0];
            g.b[w_of(i)] = qb.a[1];
            for (int j = 0; j < mq; ++j)
                g.b[2 * dim + i * mq + j] = qb.b[j];
            blocks.push_back(std::move(g));
        }
    }
    return Shadow(dim, m, std::move(blocks));
}

Shadow from_ellipsotope(const Ellipsotope& E)
{
    const int n = static_cast<int>(E.c.size()), ng = static_cast<int>(E.G.cols());
    require_dim(E.G.rows() == n, "from_ellipsotope: G must have n rows");
    require_dim(ng >= 1, "from_ellipsotope: at least one generator required");
    const int nc = static_cast<int>(E.A.rows());
    if (nc > 0)
        require_dim(E.A.cols() == ng && E.b.size() == nc, "from_ellipsotope: constraint shapes are inconsistent");

    std::vector<int> seen(ng, 0), order;
    for (const auto& J : E.index_sets) {
        if (J.empty())
            fail(ErrorKind::contract, "from_ellipsotope: empty index set");
        for (int j : J) {
            if (j < 0 || j >= ng)
                fail(ErrorKind::contract, "from_ellipsotope: index out of range");
            if (seen[j]++)
                fail(ErrorKind::contract, "from_ellipsotope: index sets overlap");
            order.push_back(j);
        }
    }
    if (static_cast<int>(order.size()) != ng)
        fail(ErrorKind::contract, "from_ellipsotope: index sets do not cover every generator");

    // ball product in the concatenated order, then permuted back
    Shadow balls = from_pnorm_ball(static_cast<int>(E.index_sets[0].size()), E.p);
    for (std::size_t k = 1; k < E.index_sets.size(); ++k)
        balls = cartesian_product(balls, from_pnorm_ball(static_cast<int>(E.index_sets[k].size()), E.p));
    bool identity = true;
    MatrixXd perm = MatrixXd::Zero(ng, ng);
    for (int k = 0; k < ng; ++k) {
        perm(order[k], k) = 1;
        identity = identity && order[k] == k;
    }
    Shadow xi = identity ? balls : linear_map(balls, perm);
    if (nc > 0) {
        HPolyhedron up{E.A, E.b}, down{-E.A, -E.b};
        xi = intersect(intersect(from_hpolyhedron(up), from_hpolyhedron(down)), xi);
    }
    return translate(linear_map(xi, E.G), E.c);
}

Shadow from_constrained_zonotope(const VectorXd& c, const MatrixXd& G, const MatrixXd& A, const VectorXd& b)
{
    Ellipsotope E;
    E.p = Rational::inf();
    E.c = c;
    E.G = G;
    E.A = A;
    E.b = b;
    for (int j = 0; j < G.cols(); ++j)
        E.index_sets.push_back({j});
    return from_ellipsotope(E);
}

} // namespace spectra
