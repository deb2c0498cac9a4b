#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "cnnsgd/gadgets.hpp"

using namespace cnnsgd;

namespace {

FeedForwardNet random_net(int in, std::vector<int> widths, int out, std::mt19937_64& gen) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    FeedForwardNet net;
    net.input_dim = in;
    widths.push_back(out);
    int prev = in;
    for (int w : widths) {
        FeedForwardNet::Layer l{Mat(w, prev), VecX(w)};
        for (int i = 0; i < w; ++i) {
            l.b(i) = u(gen);
            for (int j = 0; j < prev; ++j) l.W(i, j) = u(gen);
        }
        net.layers.push_back(l);
        prev = w;
    }
    return net;
}

double square_max_error(int R, double a) {
    const FeedForwardNet net = build_square_net(R, a);
    double err = 0.0;
    for (int i = 0; i <= 10000; ++i) {
        const double x = -a + 2.0 * a * i / 10000.0;
        err = std::max(err, std::abs(eval_ffnet(net, {x}) - x * x));
    }
    return err;
}

}  // namespace

TEST(FeedForward, IdentityAndTooth) {
    EXPECT_DOUBLE_EQ(eval_ffnet(identity_net(1, 1), {-3.0}), -3.0);
    EXPECT_DOUBLE_EQ(eval_ffnet(identity_net(1, 4), {2.5}), 2.5);
    EXPECT_DOUBLE_EQ(eval_ffnet(build_tooth_net(), {0.5}), 1.0);
    EXPECT_DOUBLE_EQ(eval_ffnet(build_tooth_net(), {0.25}), 0.5);
    EXPECT_DOUBLE_EQ(eval_ffnet(build_tooth_net(), {1.5}), 0.0);
}

TEST(FeedForward, ZeroWeightsGiveOutputOffset) {
    std::mt19937_64 gen(1);
    FeedForwardNet net = random_net(3, {4}, 1, gen);
    net.layers.back().W.setZero();
    EXPECT_DOUBLE_EQ(eval_ffnet(net, {0.1, 0.2, 0.3}), net.layers.back().b(0));
    EXPECT_ANY_THROW(eval_ffnet(net, {0.1}));
}

TEST(FeedForward, WeightStatsOfIdentity) {
    const WeightStats s = net_weight_stats(identity_net(2, 3));
    EXPECT_EQ(s.sup_norm, 1.0);
    EXPECT_EQ(s.output_offset, 0.0);
}

TEST(Compose, IdentityOuterLeavesPartUnchanged) {
    std::mt19937_64 gen(2);
    const FeedForwardNet g = random_net(3, {5, 4}, 1, gen);
    const FeedForwardNet h = compose_nets(identity_net(1, 1), {g});
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    for (int i = 0; i < 100; ++i) {
        const std::vector<double> x{u(gen), u(gen), u(gen)};
        EXPECT_NEAR(eval_ffnet(h, x), eval_ffnet(g, x), 1e-12);
    }
}

TEST(Compose, DepthsAdd) {
    std::mt19937_64 gen(3);
    const FeedForwardNet outer = random_net(2, {3, 3}, 1, gen);
    const FeedForwardNet p1 = random_net(2, {4, 4, 4}, 1, gen), p2 = random_net(2, {2, 2, 2}, 1, gen);
    EXPECT_EQ(compose_nets(outer, {p1, p2}).depth(), 5);
    EXPECT_ANY_THROW(compose_nets(outer, {p1, random_net(2, {2}, 1, gen)}));
}

TEST(Compose, CaseCKeepsTheLargerSup) {
    // parts: identity rails, zero output offsets and unit output sups; outer: tooth net with input sup 1
    const FeedForwardNet tooth = build_tooth_net();
    const FeedForwardNet part = identity_net(1, 2);
    const CompositionBounds cb = composition_bounds(tooth, {part});
    ASSERT_TRUE(cb.c_applies);
    const WeightStats merged = net_weight_stats(compose_nets(tooth, {part}));
    EXPECT_LE(merged.sup_norm, cb.case_c);
    EXPECT_EQ(merged.sup_norm, std::max(net_weight_stats(tooth).sup_norm, net_weight_stats(part).sup_norm));
}

TEST(Compose, RandomNetsRespectCaseA) {
    std::mt19937_64 gen(4);
    for (int i = 0; i < 20; ++i) {
        const FeedForwardNet outer = random_net(2, {3}, 1, gen);
        const std::vector<FeedForwardNet> parts{random_net(3, {4, 2}, 1, gen), random_net(3, {3, 5}, 1, gen)};
        const CompositionBounds cb = composition_bounds(outer, parts);
        EXPECT_LE(net_weight_stats(compose_nets(outer, parts)).sup_norm, cb.case_a);
    }
}

TEST(Compose, AssociativeInEvaluation) {
    std::mt19937_64 gen(5);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int t = 0; t < 10; ++t) {
        const FeedForwardNet f = random_net(1, {3}, 1, gen), g = random_net(1, {4}, 1, gen),
                             h = random_net(2, {3, 2}, 1, gen);
        const FeedForwardNet left = compose(compose(f, g), h), right = compose(f, compose(g, h));
        const std::vector<double> x{u(gen), u(gen)};
        EXPECT_NEAR(eval_ffnet(left, x), eval_ffnet(right, x), 1e-12);
    }
}

TEST(FeedForward, TextRoundTrip) {
    std::mt19937_64 gen(6);
    const FeedForwardNet net = random_net(2, {3, 3}, 2, gen);
    const FeedForwardNet back = read_ffnet(write_ffnet(net));
    for (std::size_t l = 0; l < net.layers.size(); ++l) {
        EXPECT_EQ(back.layers[l].W, net.layers[l].W);
        EXPECT_EQ(back.layers[l].b, net.layers[l].b);
    }
}

TEST(Square, InnerNetInterpolatesOnDyadicGrid) {
    for (int R = 1; R <= 6; ++R) {
        const FeedForwardNet s = build_square01_net(R);
        const int m = 1 << R;
        for (int k = 0; k <= m; ++k) {
            const double x = static_cast<double>(k) / m;
            EXPECT_NEAR(eval_ffnet(s, {x}), x * x, 1e-14);
        }
        EXPECT_NEAR(eval_ffnet(s, {1.0 / (2.0 * m)}) - 1.0 / (4.0 * m * m), std::pow(2.0, -2 * R - 2), 1e-15);
    }
}

TEST(Square, ErrorAndWeightBounds) {
    EXPECT_LE(square_max_error(3, 1.0), 0.015625);
    for (double a : {1.0, 2.0})
        for (int R = 2; R <= 8; ++R) EXPECT_LE(square_max_error(R, a), square_error_bound(R, a));
    const WeightStats s = net_weight_stats(build_square_net(4, 2.0));
    EXPECT_LE(s.sup_norm, 16.0);
    EXPECT_LE(s.input_weight_sup, 1.0);
}

TEST(Mult, OriginOffsetAndRandomPairs) {
    const FeedForwardNet m = build_mult_net(5, 1.0);
    EXPECT_EQ(net_weight_stats(m).output_offset, 0.0);
    EXPECT_LE(std::abs(eval_ffnet(m, {0.0, 0.0})), mult_error_bound(5, 1.0));
    std::mt19937_64 gen(7);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    double err = 0.0;
    for (int i = 0; i < 10000; ++i) {
        const double x = u(gen), y = u(gen);
        err = std::max(err, std::abs(eval_ffnet(m, {x, y}) - x * y));
    }
    EXPECT_LE(err, 0.001953125);
    EXPECT_LE(net_weight_stats(m).sup_norm, mult_weight_bound(1.0));
}

TEST(MultD, DegenerateAndThreeWay) {
    const FeedForwardNet one = build_multd_net(7, 1, 1.0);
    EXPECT_NEAR(eval_ffnet(one, {0.3}), 0.3, mult_error_bound(7, 1.0));
    const FeedForwardNet m3 = build_multd_net(12, 3, 1.0);
    std::mt19937_64 gen(8);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    double err = 0.0;
    for (int i = 0; i < 10000; ++i) {
        const double x = u(gen), y = u(gen), z = u(gen);
        err = std::max(err, std::abs(eval_ffnet(m3, {x, y, z}) - x * y * z));
    }
    EXPECT_LE(err, 12.0);
    EXPECT_LE(err, 1e-2);
    EXPECT_NEAR(eval_ffnet(m3, {1.0, 1.0, 1.0}), 1.0, multd_error_bound(12, 3, 1.0));
    EXPECT_EQ(net_weight_stats(m3).output_offset, 0.0);
    EXPECT_LE(net_weight_stats(m3).sup_norm, multd_weight_bound(3, 1.0));
    EXPECT_ANY_THROW(build_multd_net(3, 3, 1.0));
}

TEST(Poly, ZeroLinearAndConstant) {
    const auto monos = graded_lex_monomials(1, 1);
    ASSERT_EQ(monos.size(), 2u);
    EXPECT_EQ(monos[0], std::vector<int>{0});
    EXPECT_EQ(monos[1], std::vector<int>{1});
    const int R = 6;
    std::mt19937_64 gen(9);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const FeedForwardNet zero = build_poly_net(R, 1, 1, {0.0, 0.0});
    const FeedForwardNet linear = build_poly_net(R, 1, 1, {0.0, 1.0});
    const FeedForwardNet constant = build_poly_net(R, 1, 1, {0.7, 0.0});
    const FeedForwardNet mult = build_mult_net(R, 1.0);
    const double lin_bound = poly_error_bound(R, 1, 1, {0.0, 1.0}, 1.0);
    const double const_bound = poly_error_bound(R, 1, 1, {0.7, 0.0}, 1.0);
    for (int i = 0; i < 1000; ++i) {
        const double x = u(gen), y = u(gen);
        EXPECT_EQ(eval_ffnet(zero, {x, y, y}), 0.0);
        EXPECT_LE(std::abs(eval_ffnet(linear, {x, y, y}) - eval_ffnet(mult, {x, y})),
                  lin_bound + mult_error_bound(R, 1.0));
        EXPECT_LE(std::abs(eval_ffnet(constant, {x, y, y}) - 0.7 * y), const_bound);
    }
    EXPECT_ANY_THROW(build_poly_net(1, 1, 1, {0.0, 1.0}));
}

TEST(Indicator, ExactAwayFromBoundary) {
    const FeedForwardNet ind = build_indicator_net({0.0}, {1.0}, 10.0);
    EXPECT_DOUBLE_EQ(eval_ffnet(ind, {0.5}), 1.0);
    EXPECT_DOUBLE_EQ(eval_ffnet(ind, {-0.5}), 0.0);
    const double v = eval_ffnet(ind, {0.05});
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 1.0);
    EXPECT_LE(net_weight_stats(ind).sup_norm, indicator_weight_bound({0.0}, {1.0}, 10.0));
    EXPECT_ANY_THROW(build_indicator_net({0.0}, {0.1}, 10.0));
}

TEST(Indicator, TestNetScalesBySignal) {
    const FeedForwardNet t = build_test_net({0.0, 0.0}, {1.0, 1.0}, -3.0, 10.0);
    EXPECT_NEAR(eval_ffnet(t, {0.5, 0.5}), -3.0, 1e-12);
    EXPECT_NEAR(eval_ffnet(t, {0.5, 1.5}), 0.0, 1e-12);
    EXPECT_LE(net_weight_stats(t).sup_norm, test_weight_bound(10.0));
    EXPECT_ANY_THROW(build_test_net({0.0}, {1.0}, 20.0, 10.0));
}

TEST(Trunc, FloorOnSafeRegion) {
    const FeedForwardNet tr = build_trunc_net(10.0, 4);
    // step heights R * (1/R) carry the rounding of 1/R
    EXPECT_NEAR(eval_ffnet(tr, {2.7}), 2.0, 1e-12);
    EXPECT_NEAR(eval_ffnet(tr, {0.5}), 0.0, 1e-12);
    EXPECT_NEAR(eval_ffnet(tr, {4.5}), 4.0, 1e-12);
    EXPECT_EQ(net_weight_stats(tr).output_offset, 0.0);
    EXPECT_LE(net_weight_stats(tr).sup_norm, trunc_weight_bound(10.0, 4));
    EXPECT_EQ(net_weight_stats(tr).input_weight_sup, 1.0);
}
