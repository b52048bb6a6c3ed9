#include <numeric>

#include "spectra/ops.hpp"

namespace spectra {

SqSetParams SqSetParams::from_fraction(long long c1, long long c2)
{
    if (c2 < 1 || c1 < 0 || c1 > c2)
        fail(ErrorKind::contract, "S(q): need 0 <= c1 <= c2, c2 >= 1");
    long long g = std::gcd(c1, c2);
    if (g == 0)
        g = 1;
    SqSetParams p;
    p.c1 = static_cast<int>(c1 / g);
    p.c2 = static_cast<int>(c2 / g);
    if (p.c1 == 0)
        p.c2 = 1;
    p.l = 0;
    while ((1 << p.l) < p.c2)
        ++p.l;
    return p;
}

namespace {

// const + sum coef_k v_k over v = (x1, x2, lifted...)
struct Lin {
    double c = 0;
    std::vector<std::pair<int, double>> terms;

    static Lin var(int k) { return {0.0, {{k, 1.0}}}; }
    static Lin constant(double v) { return {v, {}}; }
};

Lin axpy(double a, const Lin& u, double b, const Lin& v)
{
    Lin r;
    r.c = a * u.c + b * v.c;
    for (auto [k, w] : u.terms)
        r.terms.emplace_back(k, a * w);
    for (auto [k, w] : v.terms)
        r.terms.emplace_back(k, b * w);
    return r;
}

// Block of given size whose (row, col) entries are affine in v.
struct LinBlock {
    int size;
    std::vector<std::tuple<int, int, Lin>> cells;

    BlockGroup build(int m) const
    {
        std::vector<std::vector<SymSparse::Entry>> per(3 + m);  // 0: lambda, 1..2: x, 3..: y
        for (const auto& [r, c, f] : cells) {
            if (f.c != 0)
                per[0].push_back({r, c, f.c});
            for (auto [k, w] : f.terms)
                if (w != 0)
                    per[1 + k].push_back({r, c, w});
        }
        auto mk = [&](std::vector<SymSparse::Entry> e) {
            std::sort(e.begin(), e.end(), [](const auto& a, const auto& b) {
                return a.col != b.col ? a.col < b.col : a.row < b.row;
            });
            std::vector<SymSparse::Entry> out;
            for (const auto& x : e) {
                if (!out.empty() && out.back().row == x.row && out.back().col == x.col)
                    out.back().value += x.value;
                else
                    out.push_back(x);
            }
            std::erase_if(out, [](const auto& x) { return x.value == 0.0; });
            return SymSparse(size, std::move(out));
        };
        BlockGroup g;
        g.size = size;
        g.lambda = mk(per[0]);
        g.a = {mk(per[1]), mk(per[2])};
        for (int j = 0; j < m; ++j)
            g.b.push_back(mk(per[3 + j]));
        return g;
    }
};

LinBlock row(const Lin& f) { return {1, {{0, 0, f}}}; }

} // namespace

Shadow build_sq_set(const SqSetParams& params)
{
    const int c1 = params.c1, c2 = params.c2;
    if (c2 < 1 || c1 < 0 || c1 > c2 || std::gcd(c1, c2) != 1)
        fail(ErrorKind::contract, "S(q): parameters must be a reduced fraction in [0, 1]");
    const Lin x1 = Lin::var(0), x2 = Lin::var(1);

    std::vector<LinBlock> blocks;
    int m = 0;
    if (c1 == 0) {
        blocks = {row(x1), row(x2), row(axpy(1, Lin::constant(1), -1, x2))};
    } else if (c1 == c2) {
        blocks = {row(axpy(1, x1, -1, x2)), row(x2)};
    } else {
        const int l = params.l;
        const int leaves = 1 << l;
        std::vector<Lin> level(leaves);
        for (int j = 0; j < leaves; ++j)
            level[j] = j < c1 ? x1 : (j < c2 ? Lin::constant(1) : x2);
        for (int i = 1; i <= l; ++i) {
            std::vector<Lin> next(leaves >> i);
            for (std::size_t j = 0; j < next.size(); ++j) {
                next[j] = i == l ? x2 : Lin::var(2 + m++);
                const Lin a = axpy(0.5, level[2 * j], 0.5, level[2 * j + 1]);
                const Lin d = axpy(0.5, level[2 * j], -0.5, level[2 * j + 1]);
                blocks.push_back({3, {{0, 0, a}, {1, 1, a}, {2, 2, a}, {0, 2, next[j]}, {1, 2, d}}});
            }
            level = std::move(next);
        }
        // x2 is no leaf, so only |x2| is bounded by the tower
        if (c2 == leaves)
            blocks.push_back(row(x2));
    }
    std::vector<BlockGroup> out;
    for (const auto& b : blocks)
        out.push_back(b.build(m));
    return Shadow(2, m, std::move(out));
}

} // namespace spectra
