#pragma once

// Spectrahedral shadow data model.
//
// A shadow <Lambda, {A_i}, {B_j}> is the set of x such that some y makes
// Lambda + sum x_i A_i + sum y_j B_j positive semidefinite.  The pencil is kept
// as a list of diagonal blocks; each block stores the upper triangle of its
// matrices in coordinate form.  Indices are 0-based in memory and 1-based on
// disk (see io.hpp).

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "spectra/error.hpp"

namespace spectra {

template <typename Scalar>
class BasicSymSparse {
public:
    using Dense = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

    struct Entry {
        int row;
        int col;
        Scalar value;
        friend bool operator==(const Entry&, const Entry&) = default;
    };

    BasicSymSparse() = default;
    explicit BasicSymSparse(int size) : size_(size)
    {
        require_dim(size >= 1, "SymSparse: size must be positive");
    }

    // Entries must satisfy row <= col and appear once; they are stored sorted
    // column-major so equal matrices compare equal.
    BasicSymSparse(int size, std::vector<Entry> entries) : size_(size), entries_(std::move(entries))
    {
        require_dim(size >= 1, "SymSparse: size must be positive");
        std::sort(entries_.begin(), entries_.end(), column_major);
        for (std::size_t k = 0; k < entries_.size(); ++k) {
            const Entry& e = entries_[k];
            if (e.row < 0 || e.col >= size_ || e.row > e.col)
                fail(ErrorKind::contract, "SymSparse: entry outside the upper triangle");
            if (!std::isfinite(static_cast<double>(e.value)))
                fail(ErrorKind::contract, "SymSparse: non-finite value");
            if (k > 0 && entries_[k - 1].row == e.row && entries_[k - 1].col == e.col)
                fail(ErrorKind::contract, "SymSparse: duplicate entry");
        }
    }

    static BasicSymSparse from_dense(const Dense& M, Scalar drop = Scalar(0))
    {
        require_dim(M.rows() == M.cols() && M.rows() >= 1, "SymSparse: square matrix expected");
        std::vector<Entry> e;
        for (int c = 0; c < M.cols(); ++c)
            for (int r = 0; r <= c; ++r) {
                Scalar v = (M(r, c) + M(c, r)) / Scalar(2);
                if (std::abs(v) > drop)
                    e.push_back({r, c, v});
            }
        return BasicSymSparse(static_cast<int>(M.rows()), std::move(e));
    }

    static BasicSymSparse diagonal(const std::vector<Scalar>& d)
    {
        std::vector<Entry> e;
        for (int i = 0; i < static_cast<int>(d.size()); ++i)
            if (d[i] != Scalar(0))
                e.push_back({i, i, d[i]});
        return BasicSymSparse(static_cast<int>(d.size()), std::move(e));
    }

    static BasicSymSparse identity(int size) { return diagonal(std::vector<Scalar>(size, Scalar(1))); }

    int size() const { return size_; }
    const std::vector<Entry>& entries() const { return entries_; }
    bool is_zero() const { return entries_.empty(); }

    Dense dense() const
    {
        Dense M = Dense::Zero(size_, size_);
        add_to(M, Scalar(1));
        return M;
    }

    template <typename Derived>
    void add_to(Eigen::MatrixBase<Derived>& M, Scalar alpha) const
    {
        for (const Entry& e : entries_) {
            M(e.row, e.col) += alpha * e.value;
            if (e.row != e.col)
                M(e.col, e.row) += alpha * e.value;
        }
    }

    // <this, M> over the full symmetric matrix.
    template <typename Derived>
    Scalar dot(const Eigen::MatrixBase<Derived>& M) const
    {
        Scalar s(0);
        for (const Entry& e : entries_)
            s += e.row == e.col ? e.value * M(e.row, e.col) : e.value * (M(e.row, e.col) + M(e.col, e.row));
        return s;
    }

    Scalar trace() const
    {
        Scalar t(0);
        for (const Entry& e : entries_)
            if (e.row == e.col)
                t += e.value;
        return t;
    }

    Scalar max_abs() const
    {
        Scalar m(0);
        for (const Entry& e : entries_)
            m = std::max(m, std::abs(e.value));
        return m;
    }

    // Same matrix placed at (offset, offset) inside a zero matrix of new_size.
    BasicSymSparse embedded(int offset, int new_size) const
    {
        require_dim(offset >= 0 && offset + size_ <= new_size, "SymSparse: embedding out of range");
        std::vector<Entry> e = entries_;
        for (Entry& x : e) {
            x.row += offset;
            x.col += offset;
        }
        return BasicSymSparse(new_size, std::move(e));
    }

    friend bool operator==(const BasicSymSparse&, const BasicSymSparse&) = default;

private:
    static bool column_major(const Entry& a, const Entry& b)
    {
        return a.col != b.col ? a.col < b.col : a.row < b.row;
    }

    int size_ = 1;
    std::vector<Entry> entries_;
};

// sum_k w_k M_k for matrices of equal size; exact zeros are dropped.
template <typename Scalar>
BasicSymSparse<Scalar> combine(int size, const std::vector<std::pair<Scalar, const BasicSymSparse<Scalar>*>>& terms)
{
    using Entry = typename BasicSymSparse<Scalar>::Entry;
    std::vector<Entry> all;
    for (const auto& [w, M] : terms) {
        require_dim(M->size() == size, "combine: size mismatch");
        if (w == Scalar(0))
            continue;
        for (const Entry& e : M->entries())
            all.push_back({e.row, e.col, w * e.value});
    }
    std::sort(all.begin(), all.end(), [](const Entry& a, const Entry& b) {
        return a.col != b.col ? a.col < b.col : a.row < b.row;
    });
    std::vector<Entry> out;
    for (const Entry& e : all) {
        if (!out.empty() && out.back().row == e.row && out.back().col == e.col)
            out.back().value += e.value;
        else
            out.push_back(e);
    }
    out.erase(std::remove_if(out.begin(), out.end(), [](const Entry& e) { return e.value == Scalar(0); }),
              out.end());
    return BasicSymSparse<Scalar>(size, std::move(out));
}

template <typename Scalar>
struct BasicBlockGroup {
    int size = 1;
    BasicSymSparse<Scalar> lambda;
    std::vector<BasicSymSparse<Scalar>> a;
    std::vector<BasicSymSparse<Scalar>> b;

    friend bool operator==(const BasicBlockGroup&, const BasicBlockGroup&) = default;
};

template <typename Scalar>
class BasicShadow {
public:
    using Block = BasicBlockGroup<Scalar>;

    BasicShadow(int n, int m, std::vector<Block> blocks) : n_(n), m_(m), blocks_(std::move(blocks))
    {
        require_dim(n >= 0 && m >= 0, "Shadow: negative dimension");
        require_dim(!blocks_.empty(), "Shadow: at least one block required");
        for (const Block& blk : blocks_) {
            require_dim(blk.size >= 1, "Shadow: block size must be positive");
            require_dim(static_cast<int>(blk.a.size()) == n_, "Shadow: block has wrong number of A matrices");
            require_dim(static_cast<int>(blk.b.size()) == m_, "Shadow: block has wrong number of B matrices");
            require_dim(blk.lambda.size() == blk.size, "Shadow: Lambda size differs from block size");
            for (const auto& M : blk.a)
                require_dim(M.size() == blk.size, "Shadow: A matrix size differs from block size");
            for (const auto& M : blk.b)
                require_dim(M.size() == blk.size, "Shadow: B matrix size differs from block size");
        }
    }

    int n() const { return n_; }
    int m() const { return m_; }
    const std::vector<Block>& blocks() const { return blocks_; }

    int size() const
    {
        int s = 0;
        for (const Block& b : blocks_)
            s += b.size;
        return s;
    }

    // Frobenius norm of the full Lambda, used to scale PSD tolerances.
    Scalar lambda_norm() const
    {
        Scalar s(0);
        for (const Block& b : blocks_)
            for (const auto& e : b.lambda.entries())
                s += (e.row == e.col ? 1 : 2) * e.value * e.value;
        return std::sqrt(s);
    }

    friend bool operator==(const BasicShadow&, const BasicShadow&) = default;

private:
    int n_;
    int m_;
    std::vector<Block> blocks_;
};

using SymSparse = BasicSymSparse<double>;
using BlockGroup = BasicBlockGroup<double>;
using Shadow = BasicShadow<double>;

// Block of the pencil evaluated at (x, y).
template <typename Scalar, typename VX, typename VY>
typename BasicSymSparse<Scalar>::Dense assemble_block(const BasicBlockGroup<Scalar>& blk, const VX& x, const VY& y)
{
    auto M = blk.lambda.dense();
    for (int i = 0; i < static_cast<int>(blk.a.size()); ++i)
        if (x[i] != Scalar(0))
            blk.a[i].add_to(M, x[i]);
    for (int j = 0; j < static_cast<int>(blk.b.size()); ++j)
        if (y[j] != Scalar(0))
            blk.b[j].add_to(M, y[j]);
    return M;
}

template <typename Scalar>
std::vector<typename BasicSymSparse<Scalar>::Dense> assemble(const BasicShadow<Scalar>& S,
                                                             const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& x,
                                                             const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& y)
{
    require_dim(x.size() == S.n(), "assemble: x has wrong length");
    require_dim(y.size() == S.m(), "assemble: y has wrong length");
    std::vector<typename BasicSymSparse<Scalar>::Dense> out;
    out.reserve(S.blocks().size());
    for (const auto& blk : S.blocks())
        out.push_back(assemble_block(blk, x, y));
    return out;
}

// PSD acceptance rule shared by the library: lambda_min(M) >= -tol (1 + ||M||_F).
template <typename Derived>
bool is_psd(const Eigen::MatrixBase<Derived>& M, double tol = 1e-7)
{
    using Scalar = typename Derived::Scalar;
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>> es(M, Eigen::EigenvaluesOnly);
    return es.eigenvalues()(0) >= -tol * (1 + M.norm());
}

template <typename Scalar>
bool eval_membership_fast(const BasicShadow<Scalar>& S, const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& x,
                          const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& y, double tol = 1e-7)
{
    require_dim(x.size() == S.n(), "eval_membership_fast: x has wrong length");
    require_dim(y.size() == S.m(), "eval_membership_fast: y has wrong length");
    for (const auto& blk : S.blocks())
        if (!is_psd(assemble_block(blk, x, y), tol))
            return false;
    return true;
}

// Where an input variable lands in the output of diag_concat.
struct VarRef {
    enum Kind : std::uint8_t { x, y };
    Kind kind;
    int index;
};

struct MergePlan {
    int n = 0;
    int m = 0;
    std::vector<std::vector<VarRef>> x_maps;  // per input, length n_k
    std::vector<std::vector<VarRef>> y_maps;  // per input, length m_k

    // All inputs share x; lifted variables are stacked.
    template <typename Scalar>
    static MergePlan shared_x(const std::vector<BasicShadow<Scalar>>& in)
    {
        MergePlan p;
        p.n = in.empty() ? 0 : in.front().n();
        for (const auto& S : in) {
            require_dim(S.n() == p.n, "diag_concat: ambient dimensions differ");
            std::vector<VarRef> xm, ym;
            for (int i = 0; i < S.n(); ++i)
                xm.push_back({VarRef::x, i});
            for (int j = 0; j < S.m(); ++j)
                ym.push_back({VarRef::y, p.m + j});
            p.m += S.m();
            p.x_maps.push_back(std::move(xm));
            p.y_maps.push_back(std::move(ym));
        }
        return p;
    }

    // Ambient and lifted variables are both stacked.
    template <typename Scalar>
    static MergePlan disjoint(const std::vector<BasicShadow<Scalar>>& in)
    {
        MergePlan p;
        for (const auto& S : in) {
            std::vector<VarRef> xm, ym;
            for (int i = 0; i < S.n(); ++i)
                xm.push_back({VarRef::x, p.n + i});
            for (int j = 0; j < S.m(); ++j)
                ym.push_back({VarRef::y, p.m + j});
            p.n += S.n();
            p.m += S.m();
            p.x_maps.push_back(std::move(xm));
            p.y_maps.push_back(std::move(ym));
        }
        return p;
    }
};

template <typename Scalar>
BasicShadow<Scalar> diag_concat(const std::vector<BasicShadow<Scalar>>& in, const MergePlan& plan)
{
    require_dim(!in.empty(), "diag_concat: no inputs");
    require_dim(plan.x_maps.size() == in.size() && plan.y_maps.size() == in.size(),
                "diag_concat: plan does not match the inputs");
    std::vector<BasicBlockGroup<Scalar>> blocks;
    for (std::size_t k = 0; k < in.size(); ++k) {
        const auto& S = in[k];
        require_dim(static_cast<int>(plan.x_maps[k].size()) == S.n() &&
                        static_cast<int>(plan.y_maps[k].size()) == S.m(),
                    "diag_concat: plan does not cover every variable");
        std::vector<bool> used_x(plan.n, false), used_y(plan.m, false);
        auto claim = [&](const VarRef& r) {
            auto& used = r.kind == VarRef::x ? used_x : used_y;
            require_dim(r.index >= 0 && r.index < static_cast<int>(used.size()), "diag_concat: index out of range");
            require_dim(!used[r.index], "diag_concat: plan is not injective");
            used[r.index] = true;
        };
        for (const auto& r : plan.x_maps[k])
            claim(r);
        for (const auto& r : plan.y_maps[k])
            claim(r);

        for (const auto& blk : S.blocks()) {
            BasicBlockGroup<Scalar> out;
            out.size = blk.size;
            out.lambda = blk.lambda;
            out.a.assign(plan.n, BasicSymSparse<Scalar>(blk.size));
            out.b.assign(plan.m, BasicSymSparse<Scalar>(blk.size));
            auto place = [&](const VarRef& r, const BasicSymSparse<Scalar>& M) {
                (r.kind == VarRef::x ? out.a : out.b)[r.index] = M;
            };
            for (int i = 0; i < S.n(); ++i)
                place(plan.x_maps[k][i], blk.a[i]);
            for (int j = 0; j < S.m(); ++j)
                place(plan.y_maps[k][j], blk.b[j]);
            blocks.push_back(std::move(out));
        }
    }
    return BasicShadow<Scalar>(plan.n, plan.m, std::move(blocks));
}

} // namespace spectra
