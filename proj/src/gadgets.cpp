#include "cnnsgd/gadgets.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace cnnsgd {

namespace {

Mat row(std::initializer_list<double> v) {
    Mat m(1, static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (double x : v) m(0, i++) = x;
    return m;
}

VecX vec(std::initializer_list<double> v) {
    VecX out(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (double x : v) out(i++) = x;
    return out;
}

int ceil_log2(int d) {
    int q = 0;
    while ((1 << q) < d) ++q;
    return q;
}

}  // namespace

FeedForwardNet build_tooth_net() {
    FeedForwardNet n;
    n.input_dim = 1;
    Mat W(3, 1);
    W << 1, 1, 1;
    n.layers.push_back({W, vec({0.0, -0.5, -1.0})});
    n.layers.push_back({row({2.0, -4.0, 2.0}), vec({0.0})});
    return n;
}

FeedForwardNet build_square01_net(int R) {
    if (R < 1) throw DomainError("square net needs R >= 1");
    // neurons per hidden layer: x+, x-, t1, t2, t3, c+, c-
    // t's hold the rescaled tooth iterate g_r/4^r = t1/2 - t2 + t3/2, c holds -sum_{s<r} g_s/4^s
    FeedForwardNet n;
    n.input_dim = 1;
    Mat W0 = Mat::Zero(7, 1);
    W0 << 1, -1, 1, 1, 1, 0, 0;
    n.layers.push_back({W0, vec({0, 0, 0, -0.5, -1.0, 0, 0})});
    for (int r = 2; r <= R; ++r) {
        const double sc = std::pow(4.0, -(r - 1));
        Mat W = Mat::Zero(7, 7);
        W.row(0) << 1, -1, 0, 0, 0, 0, 0;
        W.row(1) << -1, 1, 0, 0, 0, 0, 0;
        for (int t = 2; t <= 4; ++t) W.row(t) << 0, 0, 0.5, -1, 0.5, 0, 0;
        W.row(5) << 0, 0, -0.5, 1, -0.5, 1, -1;
        W.row(6) << 0, 0, 0.5, -1, 0.5, -1, 1;
        n.layers.push_back({W, vec({0, 0, 0, -0.5 * sc, -sc, 0, 0})});
    }
    n.layers.push_back({row({1, -1, -0.5, 1, -0.5, 1, -1}), vec({0.0})});
    return n;
}

FeedForwardNet build_square_net(int R, double a) {
    if (R < 1 || a < 1.0) throw DomainError("square net needs R >= 1 and a >= 1");
    const FeedForwardNet inner = compose(build_square01_net(R), affine_net(Mat::Constant(1, 1, 1.0 / (2.0 * a)), vec({0.5})));
    const FeedForwardNet both = parallel({inner, identity_net(1, R)});
    // 4a^2 S_R(x/(2a) + 1/2) - 2a x - a^2
    return compose(affine_net(row({4.0 * a * a, -2.0 * a}), vec({-a * a})), both);
}

FeedForwardNet build_mult_net(int R, double a) {
    if (R < 1 || a < 1.0) throw DomainError("mult net needs R >= 1 and a >= 1");
    const FeedForwardNet sq = build_square_net(R, 2.0 * a);
    Mat plus(1, 2), minus(1, 2);
    plus << 1, 1;
    minus << 1, -1;
    const FeedForwardNet both = parallel({compose(sq, affine_net(plus, vec({0.0}))), compose(sq, affine_net(minus, vec({0.0})))});
    return compose(affine_net(row({0.25, -0.25}), vec({0.0})), both);
}

double multd_min_depth(int d, double a) {
    return (std::log(2.0) + 2.0 * d * std::log(4.0) + 2.0 * d * std::log(a)) / std::log(4.0);
}

FeedForwardNet build_multd_net(int R, int d, double a) {
    if (d < 1 || a < 1.0) throw DomainError("multd net needs d >= 1 and a >= 1");
    const double need = multd_min_depth(d, a);
    if (R < need - 1e-12)
        throw DomainError("multd net needs R >= " + std::to_string(need) + " (got " + std::to_string(R) + ")");
    const int q = std::max(1, ceil_log2(d));
    const int width = 1 << q;
    const double am = std::pow(4.0, d) * std::pow(a, d);
    const FeedForwardNet mult = build_mult_net(R, am);

    // pad to 2^q factors with constant ones
    Mat P = Mat::Zero(width, d);
    VecX c = VecX::Zero(width);
    for (int i = 0; i < d; ++i) P(i, i) = 1.0;
    for (int i = d; i < width; ++i) c(i) = 1.0;
    FeedForwardNet net = affine_net(P, c);

    for (int level = 1; level <= q; ++level) {
        const int in = width >> (level - 1);
        std::vector<FeedForwardNet> pairs;
        for (int k = 0; k < in / 2; ++k) {
            Mat S = Mat::Zero(2, in);
            S(0, 2 * k) = 1.0;
            S(1, 2 * k + 1) = 1.0;
            pairs.push_back(compose(mult, affine_net(S, VecX::Zero(2))));
        }
        net = compose(parallel(pairs), net);
    }
    return net;
}

std::vector<std::vector<int>> graded_lex_monomials(int d, int N) {
    std::vector<std::vector<int>> out;
    for (int deg = 0; deg <= N; ++deg) {
        std::vector<int> m(d, 0);
        // lexicographically largest first: all degree on x_1
        std::vector<std::vector<int>> level;
        auto rec = [&](auto&& self, int pos, int left) -> void {
            if (pos == d - 1) {
                m[pos] = left;
                level.push_back(m);
                return;
            }
            for (int e = left; e >= 0; --e) {
                m[pos] = e;
                self(self, pos + 1, left - e);
            }
        };
        rec(rec, 0, deg);
        out.insert(out.end(), level.begin(), level.end());
    }
    return out;
}

FeedForwardNet build_poly_net(int R, int N, int d, const std::vector<double>& coeffs, double a) {
    if (N < 0 || d < 1) throw DomainError("poly net needs N >= 0 and d >= 1");
    const auto monos = graded_lex_monomials(d, N);
    const int D = static_cast<int>(monos.size());
    if (static_cast<int>(coeffs.size()) != D)
        throw ConfigError("poly net needs binom(d+N, d) = " + std::to_string(D) + " coefficients");
    const int factors = N + 1;
    const FeedForwardNet multd = build_multd_net(R, factors, a);
    std::vector<FeedForwardNet> terms;
    for (int i = 0; i < D; ++i) {
        // factors: y_i, then x_j repeated m_j times, padded with ones
        Mat S = Mat::Zero(factors, d + D);
        VecX c = VecX::Zero(factors);
        S(0, d + i) = 1.0;
        int f = 1;
        for (int j = 0; j < d; ++j)
            for (int e = 0; e < monos[i][j]; ++e) S(f++, j) = 1.0;
        for (; f < factors; ++f) c(f) = 1.0;
        terms.push_back(compose(multd, affine_net(S, c)));
    }
    Mat r(1, D);
    for (int i = 0; i < D; ++i) r(0, i) = coeffs[i];
    return compose(affine_net(r, VecX::Zero(1)), parallel(terms));
}

FeedForwardNet build_indicator_net(const std::vector<double>& a, const std::vector<double>& b, double R) {
    const int d = static_cast<int>(a.size());
    if (d < 1 || b.size() != a.size()) throw ConfigError("indicator net needs matching corners");
    if (!(R > 0.0)) throw DomainError("indicator net needs R > 0");
    for (int i = 0; i < d; ++i)
        if (b[i] - a[i] < 2.0 / R) throw DomainError("indicator box thinner than 2/R");
    FeedForwardNet n;
    n.input_dim = d;
    Mat W0 = Mat::Zero(2 * d, d);
    VecX b0(2 * d);
    for (int i = 0; i < d; ++i) {
        W0(2 * i, i) = -1.0;
        b0(2 * i) = a[i] + 1.0 / R;
        W0(2 * i + 1, i) = 1.0;
        b0(2 * i + 1) = -b[i] + 1.0 / R;
    }
    n.layers.push_back({W0, b0});
    n.layers.push_back({Mat::Constant(1, 2 * d, -R), vec({1.0})});
    n.layers.push_back({Mat::Constant(1, 1, 1.0), vec({0.0})});
    return n;
}

FeedForwardNet build_test_net(int d, double R) {
    if (d < 1 || !(R > 0.0)) throw DomainError("test net needs d >= 1 and R > 0");
    // inputs: x (0..d-1), a (d..2d-1), b (2d..3d-1), s (3d)
    FeedForwardNet n;
    n.input_dim = 3 * d + 1;
    Mat W0 = Mat::Zero(2 * d + 2, 3 * d + 1);
    VecX b0 = VecX::Zero(2 * d + 2);
    for (int i = 0; i < d; ++i) {
        W0(2 * i, i) = -1.0;
        W0(2 * i, d + i) = 1.0;
        b0(2 * i) = 1.0 / R;
        W0(2 * i + 1, i) = 1.0;
        W0(2 * i + 1, 2 * d + i) = -1.0;
        b0(2 * i + 1) = 1.0 / R;
    }
    W0(2 * d, 3 * d) = 1.0;
    W0(2 * d + 1, 3 * d) = -1.0;
    n.layers.push_back({W0, b0});
    Mat W1 = Mat::Constant(2, 2 * d + 2, -R * R);
    W1(0, 2 * d) = 1.0;
    W1(0, 2 * d + 1) = -1.0;
    W1(1, 2 * d) = -1.0;
    W1(1, 2 * d + 1) = 1.0;
    n.layers.push_back({W1, VecX::Zero(2)});
    n.layers.push_back({row({1.0, -1.0}), vec({0.0})});
    return n;
}

FeedForwardNet build_test_net(const std::vector<double>& a, const std::vector<double>& b, double s, double R) {
    const int d = static_cast<int>(a.size());
    if (d < 1 || b.size() != a.size()) throw ConfigError("test net needs matching corners");
    for (int i = 0; i < d; ++i)
        if (b[i] - a[i] < 2.0 / R) throw DomainError("test box thinner than 2/R");
    if (std::abs(s) > R) throw DomainError("test net needs |s| <= R");
    Mat A = Mat::Zero(3 * d + 1, d);
    VecX c = VecX::Zero(3 * d + 1);
    for (int i = 0; i < d; ++i) {
        A(i, i) = 1.0;
        c(d + i) = a[i];
        c(2 * d + i) = b[i];
    }
    c(3 * d) = s;
    return compose(build_test_net(d, R), affine_net(A, c));
}

FeedForwardNet build_trunc_net(double R, int B) {
    if (!(R > 0.0) || B < 1) throw DomainError("trunc net needs R > 0 and B >= 1");
    FeedForwardNet n;
    n.input_dim = 1;
    Mat W0 = Mat::Constant(2 * B, 1, 1.0);
    VecX b0(2 * B);
    Mat W1(1, 2 * B);
    for (int j = 1; j <= B; ++j) {
        b0(2 * (j - 1)) = -static_cast<double>(j);
        b0(2 * (j - 1) + 1) = -static_cast<double>(j) - 1.0 / R;
        W1(0, 2 * (j - 1)) = R;
        W1(0, 2 * (j - 1) + 1) = -R;
    }
    n.layers.push_back({W0, b0});
    n.layers.push_back({W1, vec({0.0})});
    return n;
}

double square_error_bound(int R, double a) { return a * a * std::pow(4.0, -R); }
double square_weight_bound(double a) { return 4.0 * a * a; }
double mult_error_bound(int R, double a) { return 2.0 * a * a * std::pow(4.0, -R); }
double mult_weight_bound(double a) { return 4.0 * a * a; }

double multd_error_bound(int R, int d, double a) {
    return std::pow(4.0, 4 * d + 1) * std::pow(a, 4 * d) * d * std::pow(4.0, -R);
}

double multd_weight_bound(int d, double a) { return 4.0 * std::pow(4.0, 2 * d) * std::pow(a, 2 * d); }

double poly_error_bound(int R, int N, int d, const std::vector<double>& coeffs, double a) {
    double rsum = 0.0;
    for (double r : coeffs) rsum += std::abs(r);
    (void)d;
    return rsum * multd_error_bound(R, N + 1, a);
}

double poly_weight_bound(int N, const std::vector<double>& coeffs, double a) {
    double rbar = 0.0;
    for (double r : coeffs) rbar = std::max(rbar, std::abs(r));
    return std::max(1.0, rbar) * multd_weight_bound(N + 1, a);
}

double indicator_weight_bound(const std::vector<double>& a, const std::vector<double>& b, double R) {
    double na = 0.0, nb = 0.0;
    for (double v : a) na = std::max(na, std::abs(v));
    for (double v : b) nb = std::max(nb, std::abs(v));
    return std::max({na + 1.0 / R, nb + 1.0 / R, R});
}

double test_weight_bound(double R) { return std::max(1.0, R * R); }
double trunc_weight_bound(double R, int B) { return std::max(R, B + 1.0 / R); }

}  // namespace cnnsgd
