#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

#include "spectra/core.hpp"

namespace spectra {

// Rational exponent p = num/den >= 1, or infinity.
struct Rational {
    long long num = 1;
    long long den = 1;
    bool infinite = false;

    static Rational parse(const std::string& text);  // "3/2", "2", "inf"
    static Rational inf() { return Rational{1, 0, true}; }
    double value() const;
    std::string str() const;
};

struct SqSetParams {
    int c1 = 1;
    int c2 = 1;
    int l = 0;  // smallest l with 2^l >= c2

    // q = c1 / c2, reduced to lowest terms.
    static SqSetParams from_fraction(long long c1, long long c2);
};

struct PolytopicMap {
    std::vector<Eigen::MatrixXd> vertices;  // each l x n
};

// Result of a construction that is exact only under a side condition.
struct HullResult {
    Shadow set;
    bool exact;
};

Shadow translate(const Shadow& S, const Eigen::VectorXd& b);
Shadow linear_map(const Shadow& S, const Eigen::MatrixXd& T);
Shadow linear_inverse_map(const Shadow& S, const Eigen::MatrixXd& T);
Shadow minkowski_sum(const Shadow& S1, const Shadow& S2);
Shadow intersect(const Shadow& S1, const Shadow& S2);
Shadow cartesian_product(const Shadow& S1, const Shadow& S2);

// {x in R^2 : x1^q >= x2 >= 0}
Shadow build_sq_set(const SqSetParams& params);

// Minkowski-Firey sum; both inputs must contain the origin.  p = inf gives
// the convex hull of the union.
Shadow lp_sum(const Shadow& S1, const Shadow& S2, const Rational& p);

HullResult conic_hull(const Shadow& S);
HullResult convex_hull(const Shadow& S1, const Shadow& S2);
HullResult polytopic_map(const Shadow& S, const PolytopicMap& M);

// Singular values below this fraction of the largest count as zero.
inline constexpr double kRankCutoff = 1e-10;

} // namespace spectra
