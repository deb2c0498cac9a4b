#include <gtest/gtest.h>

#include <cmath>

#include "cnnsgd/cnn.hpp"

using namespace cnnsgd;

namespace {

CnnConfig one_layer(int channels, int filter, int L2 = 1) {
    CnnConfig c;
    c.L1 = 1;
    c.channels = {channels};
    c.filter_sizes = {filter};
    c.L2 = L2;
    c.beta = 10.0;
    return c;
}

// head with a single unit passing its input through: w_1^(1) = 1, w_{1,1}^(0) = 1
void identity_head(const CnnLayout& lay, CnnParams& p) {
    p.flat[lay.head_out(0)] = 1.0;
    p.flat[lay.head_in_w(0)] = 1.0;
}

}  // namespace

TEST(LogisticLoss, ValueAtZeroIsLog2) { EXPECT_DOUBLE_EQ(logistic_loss(0.0), 0.6931471805599453); }

TEST(LogisticLoss, LargeMarginIsTiny) {
    const double v = logistic_loss(50.0);
    EXPECT_GT(v, 0.0);
    EXPECT_LT(v, 1e-20);
}

TEST(LogisticLoss, DifferenceIdentity) { EXPECT_NEAR(logistic_loss(-3.7) - logistic_loss(3.7), 3.7, 1e-12); }

TEST(LogisticLoss, NoOverflowForLargeNegative) { EXPECT_NEAR(logistic_loss(-800.0), 800.0, 1e-9); }

TEST(Truncate, Clamps) {
    EXPECT_EQ(truncate(5, 7), 5);
    EXPECT_EQ(truncate(5, -7), -5);
    EXPECT_EQ(truncate(5, 3), 3);
}

TEST(CnnForward, BiasOnlyNetworkReturnsBias) {
    const CnnConfig cfg = one_layer(1, 1);
    const CnnLayout lay(cfg);
    CnnParams p = CnnParams::zeros(cfg);
    p.flat[lay.conv_b(1, 0)] = 0.7;
    p.flat[lay.out_w(0)] = 1.0;
    identity_head(lay, p);
    const CnnForward fw = cnn_forward(cfg, p, ImageGrid::filled(3, 3, 0.4));
    EXPECT_DOUBLE_EQ(fw.pool_value, 0.7);
    EXPECT_DOUBLE_EQ(fw.value, 0.7);
}

TEST(CnnForward, UnitFilterAndPoolGiveMaxPixel) {
    const CnnConfig cfg = one_layer(1, 1);
    const CnnLayout lay(cfg);
    CnnParams p = CnnParams::zeros(cfg);
    p.flat[lay.conv_w(1, 0, 0, 0, 0)] = 1.0;
    p.flat[lay.out_w(0)] = 1.0;
    identity_head(lay, p);
    const ImageGrid x(2, 3, {0.1, 0.9, 0.3, 0.2, 0.5, 0.0});
    EXPECT_DOUBLE_EQ(cnn_value(cfg, p, x), 0.9);
}

TEST(CnnForward, FilterOfOnesWithZeroPadding) {
    const CnnConfig cfg = one_layer(1, 2);
    const CnnLayout lay(cfg);
    CnnParams p = CnnParams::zeros(cfg);
    for (int t1 = 0; t1 < 2; ++t1)
        for (int t2 = 0; t2 < 2; ++t2) p.flat[lay.conv_w(1, t1, t2, 0, 0)] = 1.0;
    p.flat[lay.out_w(0)] = 1.0;
    identity_head(lay, p);
    const ImageGrid x(2, 2, {0.1, 0.2, 0.3, 0.4});
    const CnnForward fw = cnn_forward(cfg, p, x);
    EXPECT_NEAR(fw.features.at(1, 0, 0, 0), 1.0, 1e-15);
    // pooling uses the single window position that fits the filter
    EXPECT_NEAR(fw.pool_value, 1.0, 1e-15);
    EXPECT_EQ(fw.pool_i, 0);
    EXPECT_EQ(fw.pool_j, 0);
}

TEST(CnnForward, RejectsPixelsOutsideUnitInterval) {
    EXPECT_THROW(ImageGrid(1, 2, {0.5, 1.5}), DomainError);
}

TEST(CnnForward, RejectsFilterLargerThanImage) {
    const CnnConfig cfg = one_layer(1, 4);
    EXPECT_THROW(cnn_forward(cfg, CnnParams::zeros(cfg), ImageGrid::filled(3, 3, 0.1)), ConfigError);
}

TEST(CnnParams, ShapeIsChecked) {
    const CnnConfig cfg = one_layer(2, 2, 3);
    CnnParams p = CnnParams::zeros(cfg);
    p.flat.pop_back();
    EXPECT_THROW(p.check_shape(cfg), ConfigError);
}

TEST(EnsembleEval, ZeroWeightsGiveZero) {
    const CnnConfig cfg = one_layer(1, 1);
    CnnParams p = CnnParams::zeros(cfg);
    p.flat[CnnLayout(cfg).head_bias()] = 3.0;
    EnsembleParams ens{{0.0, 0.0}, {p, p}, {}};
    EXPECT_EQ(ensemble_eval(cfg, ens, ImageGrid::filled(2, 2, 0.5)), 0.0);
}

TEST(EnsembleEval, TruncatesEachComponent) {
    CnnConfig cfg = one_layer(1, 1);
    cfg.beta = 3.0;
    const CnnLayout lay(cfg);
    CnnParams a = CnnParams::zeros(cfg), b = CnnParams::zeros(cfg);
    a.flat[lay.head_bias()] = 2.0;
    b.flat[lay.head_bias()] = -4.0;
    EnsembleParams ens{{0.3, 0.2}, {a, b}, {}};
    EXPECT_NEAR(ensemble_eval(cfg, ens, ImageGrid::filled(2, 2, 0.5)), 0.0, 1e-15);
    cfg.beta = 5.0;
    a.flat[lay.head_bias()] = 7.0;
    EnsembleParams single{{1.0}, {a}, {}};
    EXPECT_EQ(ensemble_eval(cfg, single, ImageGrid::filled(2, 2, 0.5)), 5.0);
}

TEST(Architecture, LevelOneUsesFilterTwoEverywhere) {
    const ArchitectureSchedule a = theorem2_architecture(1000, 1.0, 1, 1.0, 1.0, 8);
    EXPECT_EQ(a.config.L1, a.Q + 1);
    for (int m : a.config.filter_sizes) EXPECT_EQ(m, 2);
    for (int k : a.config.channels) EXPECT_EQ(k, 8);
}

TEST(Architecture, LevelTwoSchedule) {
    const ArchitectureSchedule a = theorem2_architecture(8, 1.0, 2, 0.01, 1.0, 8);
    ASSERT_EQ(a.Q, 1);
    EXPECT_EQ(a.config.L1, 7);
    EXPECT_EQ(a.config.filter_sizes, (std::vector<int>{2, 2, 2, 2, 2, 4, 4}));
}

TEST(Architecture, SingleSampleGivesOneHeadUnit) {
    EXPECT_EQ(theorem2_architecture(1, 1.0, 1, 1.0, 1.0, 8).config.L2, 1);
}

TEST(Architecture, RejectsBadInputs) {
    EXPECT_THROW(theorem2_architecture(0, 1.0, 1), ConfigError);
    EXPECT_THROW(theorem2_architecture(10, 1.0, 0), ConfigError);
    EXPECT_THROW(theorem2_architecture(10, 1.0, 1, 1.0, 1.0, 0), ConfigError);
}
