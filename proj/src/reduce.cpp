#include "spectra/reduce.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "spectra/conic.hpp"
#include "spectra/convert.hpp"
#include "spectra/ops.hpp"

namespace spectra {

using Eigen::MatrixXd;
using Eigen::VectorXd;

DirectionSet uniform_directions(int n, int k, std::uint64_t seed)
{
    require_dim(n >= 1, "uniform_directions: n must be positive");
    require_dim(k >= 2, "uniform_directions: need at least two directions");
    DirectionSet out;
    out.dim = n;
    if (n == 1) {
        for (int i = 0; i < k; ++i)
            out.vectors.push_back(VectorXd::Constant(1, i % 2 == 0 ? 1.0 : -1.0));
        return out;
    }
    if (n == 2) {
        for (int i = 0; i < k; ++i) {
            const double th = 2 * std::numbers::pi * i / k;
            out.vectors.push_back((VectorXd(2) << std::cos(th), std::sin(th)).finished());
        }
        return out;
    }

    std::vector<VectorXd> p(k);
    if (n == 3) {
        const double golden = std::numbers::pi * (3 - std::sqrt(5.0));
        const double rot = static_cast<double>(seed % 1000) * 0.001 * 2 * std::numbers::pi;
        for (int i = 0; i < k; ++i) {
            const double z = 1 - 2 * (i + 0.5) / k;
            const double r = std::sqrt(std::max(0.0, 1 - z * z));
            p[i] = (VectorXd(3) << r * std::cos(golden * i + rot), r * std::sin(golden * i + rot), z).finished();
        }
    } else {
        std::mt19937_64 rng(seed);
        std::normal_distribution<double> g;
        for (auto& v : p) {
            v.resize(n);
            for (int j = 0; j < n; ++j)
                v(j) = g(rng);
            v.normalize();
        }
    }
    // repulsion on the sphere
    const double typical = std::pow(static_cast<double>(k), -1.0 / (n - 1));
    double step = 0.1 * typical;
    std::vector<VectorXd> f(k);
    for (int it = 0; it < 400; ++it) {
        for (int i = 0; i < k; ++i) {
            f[i] = VectorXd::Zero(n);
            for (int j = 0; j < k; ++j) {
                if (i == j)
                    continue;
                VectorXd d = p[i] - p[j];
                const double r = std::max(d.norm(), 1e-9);
                f[i] += d / std::pow(r, n);
            }
            f[i] -= f[i].dot(p[i]) * p[i];
        }
        double fmax = 0;
        for (const auto& v : f)
            fmax = std::max(fmax, v.norm());
        if (fmax == 0)
            break;
        for (int i = 0; i < k; ++i)
            p[i] = (p[i] + step * f[i] / fmax).normalized();
        step *= 0.99;
    }
    out.vectors = std::move(p);
    return out;
}

namespace {

VectorXd unit(int n, int i, double s)
{
    VectorXd e = VectorXd::Zero(n);
    e(i) = s;
    return e;
}

void require_spectrahedron(const Shadow& S, const char* op)
{
    if (S.m() != 0)
        fail(ErrorKind::contract,
             std::string(op) + ": spectrahedron (m = 0) expected; use polyhedral_approx for shadows with m > 0");
}

// Reduced pencil P' M P for P holding the trailing eigenvectors of Lambda(x).
BlockGroup tangent_block(const Shadow& S, const VectorXd& x, int size)
{
    struct Eig {
        double value;
        int block;
        VectorXd vec;
    };
    std::vector<Eig> all;
    const auto dense = assemble(S, x, VectorXd());
    for (std::size_t b = 0; b < dense.size(); ++b) {
        Eigen::SelfAdjointEigenSolver<MatrixXd> es(dense[b]);
        if (es.info() != Eigen::Success)
            fail(ErrorKind::numerical, "lowrank_reduce: eigendecomposition failed");
        for (int k = 0; k < es.eigenvalues().size(); ++k)
            all.push_back({es.eigenvalues()(k), static_cast<int>(b), es.eigenvectors().col(k)});
    }
    std::stable_sort(all.begin(), all.end(), [](const Eig& a, const Eig& b) { return a.value < b.value; });
    all.resize(size);

    auto project = [&](auto get) {
        MatrixXd R = MatrixXd::Zero(size, size);
        for (int a = 0; a < size; ++a)
            for (int c = a; c < size; ++c)
                if (all[a].block == all[c].block) {
                    const MatrixXd M = get(S.blocks()[all[a].block]).dense();
                    R(a, c) = R(c, a) = all[a].vec.dot(M * all[c].vec);
                }
        return SymSparse::from_dense(R, 1e-14 * (1 + R.cwiseAbs().maxCoeff()));
    };
    BlockGroup g;
    g.size = size;
    g.lambda = project([](const BlockGroup& b) -> const SymSparse& { return b.lambda; });
    for (int i = 0; i < S.n(); ++i)
        g.a.push_back(project([i](const BlockGroup& b) -> const SymSparse& { return b.a[i]; }));
    return g;
}

Shadow lowrank_core(const Shadow& Sg, const ReductionConfig& cfg)
{
    const int n = Sg.n(), np = 2 * n, sg = Sg.size();
    std::vector<int> sizes;
    if (cfg.per_point_sizes) {
        sizes = *cfg.per_point_sizes;
        if (static_cast<int>(sizes.size()) != np)
            fail(ErrorKind::contract, "lowrank_reduce: one size per boundary point (2n) expected");
        int total = 0;
        for (int s : sizes)
            total += s;
        if (total != cfg.target_size)
            fail(ErrorKind::contract, "lowrank_reduce: per-point sizes must sum to the target size");
    } else {
        sizes.assign(np, cfg.target_size / np);
        for (int i = 0; i < cfg.target_size % np; ++i)
            ++sizes[i];
    }
    for (int s : sizes)
        if (s < 0 || s > sg)
            fail(ErrorKind::contract, "lowrank_reduce: per-point size exceeds the size of the input");

    const auto pts = boundary_points(Sg);
    std::vector<BlockGroup> blocks;
    for (int i = 0; i < np; ++i)
        if (sizes[i] > 0)
            blocks.push_back(tangent_block(Sg, pts[i], sizes[i]));
    return Shadow(n, 0, std::move(blocks));
}

} // namespace

std::vector<VectorXd> boundary_points(const Shadow& Sg)
{
    require_spectrahedron(Sg, "boundary_points");
    std::vector<VectorXd> out;
    for (int i = 0; i < Sg.n(); ++i)
        for (double s : {1.0, -1.0}) {
            SolveReport r = solve_support(Sg, unit(Sg.n(), i, s));
            if (r.status == SolveStatus::unbounded)
                fail(ErrorKind::contract, "boundary_points: set is unbounded along coordinate " + std::to_string(i + 1));
            if (!r.ok())
                fail(ErrorKind::numerical, "boundary_points: support solve failed (" + r.message + ")");
            out.push_back(r.primal_point.head(Sg.n()));
        }
    return out;
}

Shadow lowrank_reduce(const Shadow& Sg, const ReductionConfig& cfg)
{
    require_spectrahedron(Sg, "lowrank_reduce");
    if (cfg.target_size < 1)
        fail(ErrorKind::contract, "lowrank_reduce: target size must be positive");
    if (!cfg.isotropic)
        return lowrank_core(Sg, cfg);
    const IsotropicTransform it = isotropic_transform(Sg);
    return linear_inverse_map(lowrank_core(linear_map(Sg, it.T), cfg), it.T);
}

Shadow polyhedral_approx(const Shadow& Sg, const DirectionSet& dirs)
{
    require_dim(dirs.dim == Sg.n(), "polyhedral_approx: directions have the wrong dimension");
    const int k = static_cast<int>(dirs.vectors.size());
    require_dim(k >= 1, "polyhedral_approx: no directions");
    const bool dual = Sg.blocks().size() >= 2 || static_cast<double>(Sg.size()) * Sg.size() > 8.0 * (Sg.n() + Sg.m());
    std::vector<SolveReport> rs;
    if (dual) {
        rs = solve_support_batch_dual(Sg, dirs.vectors);
    } else {
        for (const auto& a : dirs.vectors)
            rs.push_back(solve_support(Sg, a));
    }
    HPolyhedron P;
    P.A.resize(k, Sg.n());
    P.b.resize(k);
    for (int i = 0; i < k; ++i) {
        if (rs[i].status == SolveStatus::unbounded) {
            std::ostringstream os;
            os << "polyhedral_approx: set is unbounded in direction " << dirs.vectors[i].transpose();
            fail(ErrorKind::contract, os.str());
        }
        if (!rs[i].ok())
            fail(ErrorKind::numerical, "polyhedral_approx: support solve failed (" + rs[i].message + ")");
        P.A.row(i) = dirs.vectors[i].transpose();
        P.b(i) = rs[i].optimum;
    }
    return from_hpolyhedron(P);
}

Shadow polyhedral_approx(const Shadow& Sg, int k, std::uint64_t seed)
{
    return polyhedral_approx(Sg, uniform_directions(Sg.n(), k, seed));
}

IsotropicTransform isotropic_transform(const Shadow& Sg)
{
    require_spectrahedron(Sg, "isotropic_transform");
    Parallelotope par = solve_min_parallelotope(Sg);
    if (!par.report.ok())
        fail(ErrorKind::numerical, std::string("isotropic_transform: ") + to_string(par.report.status) + " (" +
                                       par.report.message + ")");
    return {par.T, par.T.lu().solve(par.c_prime)};
}

Shadow reduce(const Shadow& S, const ReductionConfig& cfg)
{
    if (cfg.strategy == ReductionStrategy::polyhedral)
        return polyhedral_approx(S, cfg.target_size, cfg.seed);
    return lowrank_reduce(S, cfg);
}

} // namespace spectra
