#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "cnnsgd/gadgets.hpp"
#include "cnnsgd/taylor.hpp"

using namespace cnnsgd;

namespace {

double sin_oracle(const std::vector<double>& x, const std::vector<int>& l) {
    switch (l[0] % 4) {
        case 0: return std::sin(x[0]);
        case 1: return std::cos(x[0]);
        case 2: return -std::sin(x[0]);
        default: return -std::cos(x[0]);
    }
}

TaylorConfig sine(int M) {
    TaylorConfig c;
    c.d = 1;
    c.q = 1;
    c.p = 2.0;
    c.M = M;
    c.derivative = sin_oracle;
    return c;
}

double interior_error(const TaylorNet& T, const std::function<double(double)>& f) {
    double err = 0.0;
    for (int i = 0; i < 2000; ++i) {
        const std::vector<double> x{-1.0 + 2.0 * (i + 0.5) / 2000};
        if (T.boundary_distance(x) < 2.0 * T.delta) continue;
        err = std::max(err, std::abs(eval_ffnet(T.deep, x) - f(x[0])));
    }
    return err;
}

}  // namespace

TEST(Taylor, LinearFunctionOnlyCarriesGadgetError) {
    TaylorConfig c = sine(2);
    c.derivative = [](const std::vector<double>& x, const std::vector<int>& l) {
        return l[0] == 0 ? x[0] : (l[0] == 1 ? 1.0 : 0.0);
    };
    const TaylorNet T = build_taylor_net(c);
    const double gadget = poly_error_bound(T.poly_R, c.q, c.d, {1.0, 1.0, 1.0, 1.0}, T.poly_a);
    EXPECT_LE(interior_error(T, [](double x) { return x; }), 10.0 * std::max(gadget, 1e-9));
}

TEST(Taylor, ThreeWayAgreementAtMThree) {
    const TaylorNet T = build_taylor_net(sine(3));
    int used = 0;
    for (int i = 0; i < 3000; ++i) {
        const std::vector<double> x{-1.0 + 2.0 * (i + 0.5) / 3000};
        if (T.boundary_distance(x) < 2.0 * T.delta) continue;
        ++used;
        const double net = eval_ffnet(T.deep, x), rec = T.recursion(x), dir = T.direct(x);
        EXPECT_NEAR(net, rec, 1e-6);
        EXPECT_NEAR(net, dir, 1e-6);
        EXPECT_NEAR(rec, dir, 1e-9);
    }
    EXPECT_GT(used, 2000);
}

TEST(Taylor, InteriorErrorFallsWithM) {
    double prev = INFINITY;
    for (int M = 2; M <= 4; ++M) {
        const double err = interior_error(build_taylor_net(sine(M)), [](double x) { return std::sin(x); });
        EXPECT_LT(err, prev) << "M = " << M;
        prev = err;
    }
}

TEST(Taylor, CertificateAndEnvelope) {
    const TaylorNet T = build_taylor_net(sine(2));
    EXPECT_NEAR(T.certificate.sup_norm, std::exp(T.certificate_c * (T.cfg.p + 1.0) * T.cfg.M), 1e-9 * T.certificate.sup_norm);
    TaylorConfig big = sine(5);
    EXPECT_ANY_THROW(build_taylor_net(big));
    TaylorConfig three = sine(2);
    three.d = 3;
    EXPECT_ANY_THROW(build_taylor_net(three));
}

TEST(Digits, RoundTrip) {
    std::mt19937_64 gen(3);
    for (int d = 1; d <= 2; ++d) {
        const int ce = static_cast<int>(std::ceil(std::exp(static_cast<double>(d))));
        std::uniform_int_distribution<int> digit(-(ce + 1), ce + 1);
        for (int t = 0; t < 200; ++t) {
            std::vector<int> b(1 + t % (d == 1 ? 15 : 8));
            for (auto& v : b) v = digit(gen);
            EXPECT_EQ(decode_digits(encode_digits(b, ce), static_cast<int>(b.size()), ce), b);
        }
    }
}

TEST(ShiftedPartition, WeightsSumToOne) {
    const ShiftedTaylor S = shifted_partition_combine(sine(3));
    std::mt19937_64 gen(4);
    std::uniform_real_distribution<double> u(S.lo, S.hi);
    for (int i = 0; i < 10000; ++i) EXPECT_NEAR(S.weight_sum({u(gen)}), 1.0, 1e-9);
}

TEST(ShiftedPartition, ConstantFunctionRecoveredAtBoundaries) {
    const double c = 0.6;
    TaylorConfig cfg = sine(3);
    cfg.derivative = [c](const std::vector<double>&, const std::vector<int>& l) { return l[0] == 0 ? c : 0.0; };
    const ShiftedTaylor S = shifted_partition_combine(cfg);
    const TaylorNet& single = S.nets[0];
    const double h = single.h;
    double combined_err = 0.0, single_err = 0.0;
    // points just inside each fine-cell boundary of the unshifted grid
    for (double edge = -1.0 + h; edge < S.hi - h / 2.0; edge += h)
        for (double off : {-1e-4, 1e-4}) {
            const std::vector<double> x{edge + off};
            combined_err = std::max(combined_err, std::abs(S.eval(x) - c));
            single_err = std::max(single_err, std::abs(eval_ffnet(single.truth, x) - c));
        }
    std::mt19937_64 gen(5);
    std::uniform_real_distribution<double> u(S.lo, S.hi);
    for (int i = 0; i < 2000; ++i) combined_err = std::max(combined_err, std::abs(S.eval({u(gen)}) - c));
    // inside the check band (2 delta around a boundary) the truth net is zeroed while the hat weight
    // is still up to 4 delta / h, so that mass of c is lost; everything else is gadget error
    const double band_loss = c * 4.0 * single.delta / h;
    EXPECT_LE(combined_err, band_loss + 1e-6);
    EXPECT_GE(single_err, 10.0 * combined_err);
}
