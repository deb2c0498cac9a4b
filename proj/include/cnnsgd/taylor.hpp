#pragma once

#include <functional>
#include <string>
#include <vector>

#include "cnnsgd/ffnet.hpp"

namespace cnnsgd {

// Returns the partial derivative of f with multi-index l at x.
using DerivativeOracle = std::function<double(const std::vector<double>& x, const std::vector<int>& l)>;

struct TaylorConfig {
    int d = 1;
    double a = 1.0;  // domain [-a, a)^d
    int M = 2;       // coarse cells have side 2a/M, fine cells 2a/M^2
    int q = 1;       // Taylor degree
    double p = 2.0;  // smoothness, q < p <= q + 1
    double C = 1.0;  // smoothness constant
    DerivativeOracle derivative;
    double f_norm = 0.0;  // sup of |d^l f| over |l| <= q; 0 means measure it on the fine grid

    void validate() const;
};

struct TaylorSizeCheck {
    bool holds = false;
    double lhs = 0.0;  // M^(2p)
    double rhs = 0.0;
    std::string message;
};

TaylorSizeCheck taylor_size_check(const TaylorConfig& cfg);

// Digits b_k in [-(ce+1), ce+1] packed base (4 + 2 ce) with a trailing half digit.
double encode_digits(const std::vector<int>& digits, int ce);
std::vector<int> decode_digits(double code, int count, int ce);

struct TaylorNet {
    TaylorConfig cfg;
    int ce = 0;    // ceil(e^d)
    int base = 0;  // 4 + 2 ce
    double h = 0.0;
    double c36 = 0.0;
    double delta = 0.0;  // 1 / M^(2p+2)
    std::vector<std::vector<int>> multi;  // multi-indices |l| <= q, graded lexicographic
    std::vector<std::vector<double>> coarse_left;     // corner of each coarse cell
    std::vector<std::vector<double>> sub_offset;      // offset of the k-th fine cell inside its coarse cell
    std::vector<std::vector<std::vector<int>>> digits;  // [cell][l][k]
    std::vector<std::vector<double>> codes;             // [cell][l]
    double B_true = 0.0;
    double poly_a = 1.0;
    int poly_R = 0;
    int mult_R = 0;
    TaylorSizeCheck size;

    FeedForwardNet deep;       // approximates the piecewise Taylor polynomial on fine-cell interiors
    FeedForwardNet weight;     // tensor-product hat on the fine cell
    FeedForwardNet check;      // 0 on fine-cell interiors, 1 on cell boundaries
    FeedForwardNet truth;      // deep net zeroed where check is 1
    FeedForwardNet assembled;  // mult(truth, weight)
    WeightStats certificate;
    double certificate_c = 0.0;  // sup weight = exp(c (p+1) M^d)

    // the phi recursion evaluated in exact arithmetic with set indicators and floor
    double recursion(const std::vector<double>& x) const;
    // the Taylor polynomial with corrected derivatives, evaluated cell by cell
    double direct(const std::vector<double>& x) const;
    double weight_exact(const std::vector<double>& x) const;
    // distance from x to the nearest fine-cell boundary (sup norm)
    double boundary_distance(const std::vector<double>& x) const;
};

TaylorNet build_taylor_net(const TaylorConfig& cfg);

// 2^d copies on grids shifted by half a fine cell; their hat weights sum to one.
struct ShiftedTaylor {
    std::vector<TaylorNet> nets;
    std::vector<std::vector<double>> shifts;
    double lo = 0.0, hi = 0.0;  // valid region [lo, hi)^d

    double eval(const std::vector<double>& x) const;
    double weight_sum(const std::vector<double>& x) const;
};

ShiftedTaylor shifted_partition_combine(const TaylorConfig& cfg);

}  // namespace cnnsgd
