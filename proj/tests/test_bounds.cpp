#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "cnnsgd/bounds.hpp"
#include "cnnsgd/hmax.hpp"

using namespace cnnsgd;

namespace {

CnnConfig unit_config(int L1 = 1, int L2 = 1, int k = 1, int M = 1) {
    CnnConfig c;
    c.L1 = L1;
    c.channels.assign(L1, k);
    c.filter_sizes.assign(L1, M);
    c.L2 = L2;
    c.beta = 10.0;
    return c;
}

std::vector<ImageGrid> images(int n, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<ImageGrid> out;
    for (int i = 0; i < n; ++i) out.push_back(sample_image(3, 3, PixelLaw{}, rng));
    return out;
}

CnnParams random_params(const CnnConfig& cfg, double B, std::mt19937_64& gen) {
    std::uniform_real_distribution<double> u(-B, B);
    CnnParams p = CnnParams::zeros(cfg);
    for (double& v : p.flat) v = u(gen);
    return p;
}

}  // namespace

TEST(Lipschitz, FormulaExamples) {
    EXPECT_DOUBLE_EQ(lipschitz_bound(unit_config(), 1.0), 224.0);
    const CnnConfig c = unit_config(2, 3, 2, 3);
    EXPECT_DOUBLE_EQ(lipschitz_bound(c, 0.0), 7.0 * 3 * 2 * std::pow(2.0, 3) * std::pow(10.0, 2));
    EXPECT_DOUBLE_EQ(lipschitz_bound(unit_config(2, 6, 2, 3), 1.5), 2.0 * lipschitz_bound(unit_config(2, 3, 2, 3), 1.5));
    EXPECT_NEAR(lipschitz_bound_log(c, 1.5), std::log(lipschitz_bound(c, 1.5)), 1e-12);
}

TEST(Lipschitz, MonotoneInEachArgument) {
    std::mt19937_64 gen(1);
    std::uniform_int_distribution<int> small(1, 4);
    std::uniform_real_distribution<double> box(0.0, 3.0);
    for (int t = 0; t < 100; ++t) {
        const int L1 = small(gen), L2 = small(gen), k = small(gen), M = small(gen);
        const double B = box(gen);
        const double base = lipschitz_bound(unit_config(L1, L2, k, M), B);
        EXPECT_LE(base, lipschitz_bound(unit_config(L1 + 1, L2, k, M), B));
        EXPECT_LE(base, lipschitz_bound(unit_config(L1, L2 + 1, k, M), B));
        EXPECT_LE(base, lipschitz_bound(unit_config(L1, L2, k + 1, M), B));
        EXPECT_LE(base, lipschitz_bound(unit_config(L1, L2, k, M + 1), B));
        EXPECT_LE(base, lipschitz_bound(unit_config(L1, L2, k, M), B + 0.5));
        const double g = grad_sup_bound(unit_config(L1, L2, k, M), 1.0 + B);
        EXPECT_LE(g, grad_sup_bound(unit_config(L1 + 1, L2, k, M), 1.0 + B));
        EXPECT_LE(g, grad_sup_bound(unit_config(L1, L2, k, M), 1.5 + B));
    }
}

TEST(Lipschitz, EmpiricalRatioBelowFormula) {
    const CnnConfig cfg = unit_config(2, 2, 2, 2);
    const auto xs = images(20, 3);
    std::mt19937_64 gen(2);
    std::uniform_real_distribution<double> step(-1.0, 1.0);
    const CnnParams theta = random_params(cfg, 1.0, gen);
    EXPECT_EQ(empirical_lipschitz(cfg, theta, theta, xs), 0.0);
    for (int t = 0; t < 20; ++t) {
        CnnParams bar = theta, half = theta;
        for (std::size_t i = 0; i < bar.flat.size(); ++i) {
            const double s = step(gen);
            bar.flat[i] += s;
            half.flat[i] += 0.5 * s;
        }
        const double bound = lipschitz_bound(cfg, 2.0);
        EXPECT_LE(empirical_lipschitz(cfg, theta, bar, xs), bound);
        EXPECT_LE(empirical_lipschitz(cfg, theta, half, xs), bound);
    }
}

TEST(GradientBound, FormulaExamples) {
    EXPECT_DOUBLE_EQ(grad_sup_bound(unit_config(), 1.0), 16.0);
    EXPECT_DOUBLE_EQ(grad_sup_bound(unit_config(1, 2), 1.0), 32.0);
    EXPECT_NEAR(grad_sup_bound_log(unit_config(3, 2, 4, 3), 2.0), std::log(grad_sup_bound(unit_config(3, 2, 4, 3), 2.0)),
                1e-12);
}

TEST(Structural, VcExamples) {
    const StructuralBound b = vc_structural_bound(10, 10);
    EXPECT_NEAR(b.value, 200.0 * std::log(10.0), 1e-12);
    EXPECT_NEAR(b.value, 460.5, 0.05);
    EXPECT_TRUE(b.constant_unspecified);
    EXPECT_LT(vc_structural_bound(4, 3).value, vc_structural_bound(4, 5).value);
    EXPECT_ANY_THROW(vc_structural_bound(1, 4));
}

TEST(Hierarchy, ErrorBoundExamples) {
    EXPECT_DOUBLE_EQ(hierarchy_error_bound(1, 2.0, 0, 0.3), 0.3);
    EXPECT_NEAR(hierarchy_error_bound(1, 1.0, 2, 0.1), 0.9, 1e-15);
    EXPECT_EQ(hierarchy_error_bound(4, 1.0, 3, 0.0), 0.0);
    EXPECT_DOUBLE_EQ(hierarchy_error_bound(4, 1.0, 1, 1.0), 6.0);
}

TEST(Rademacher, ZeroTruncationKillsTheClass) {
    RademacherConfig rc;
    rc.beta = 0.0;
    rc.trials = 3;
    EXPECT_EQ(rademacher_mc(unit_config(), images(8, 4), rc).mean, 0.0);
}

TEST(Rademacher, SingleImageReachesTruncation) {
    RademacherConfig rc;
    rc.B = 1.0;
    rc.beta = 0.5;
    rc.trials = 6;
    rc.seed = 9;
    const RademacherEstimate r = rademacher_mc(unit_config(), images(1, 5), rc);
    EXPECT_NEAR(r.mean, 0.5, 1e-12);
    for (double v : r.per_trial) {
        EXPECT_GE(v, 0.0);
        EXPECT_LE(v, rc.beta);
    }
}

TEST(Rademacher, DeterministicForFixedSeed) {
    RademacherConfig rc;
    rc.trials = 4;
    rc.seed = 17;
    const auto xs = images(32, 6);
    rc.threads = 1;
    const RademacherEstimate a = rademacher_mc(unit_config(1, 1, 2, 2), xs, rc);
    rc.threads = 3;
    const RademacherEstimate b = rademacher_mc(unit_config(1, 1, 2, 2), xs, rc);
    EXPECT_EQ(a.per_trial, b.per_trial);
}

TEST(Report, MarginAndCsv) {
    BoundReport r{"x", 2.0, 1.5};
    EXPECT_DOUBLE_EQ(*r.margin(), 0.5);
    EXPECT_TRUE(r.dominates());
    r.empirical_value = 3.0;
    EXPECT_FALSE(r.dominates());
    const BoundReport formula_only{"y", 1.0, std::nullopt};
    EXPECT_TRUE(formula_only.dominates());
    EXPECT_EQ(BoundReport::csv_header().find("name"), 0u);
}
