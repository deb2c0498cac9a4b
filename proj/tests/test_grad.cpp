#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "cnnsgd/grad.hpp"
#include "cnnsgd/sgd.hpp"

using namespace cnnsgd;

namespace {

CnnConfig small_config() {
    CnnConfig c;
    c.L1 = 1;
    c.channels = {2};
    c.filter_sizes = {2};
    c.L2 = 2;
    c.beta = 3.0;
    return c;
}

CnnParams random_params(const CnnConfig& cfg, Rng& rng) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    CnnParams p = CnnParams::zeros(cfg);
    for (auto& v : p.flat) v = u(rng);
    return p;
}

ImageGrid random_image(int d, Rng& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> px(d * d);
    for (auto& v : px) v = u(rng);
    return ImageGrid(d, d, px);
}

}  // namespace

TEST(GradEnsemble, OuterWeightGradientAtZeroOutput) {
    const CnnConfig cfg = small_config();
    const CnnLayout lay(cfg);
    CnnParams a = CnnParams::zeros(cfg), b = CnnParams::zeros(cfg);
    a.flat[lay.head_bias()] = 1.5;
    b.flat[lay.head_bias()] = -1.5;
    // equal weights make the ensemble output 0, so the loss derivative is -1/2
    EnsembleParams ens{{0.25, 0.25}, {a, b}, {a, b}};
    const GradBundle g = grad_ensemble(cfg, ens, ImageGrid::filled(3, 3, 0.2), 1);
    EXPECT_NEAR(g.d_w[0], -0.75, 1e-15);
    EXPECT_NEAR(g.d_w[1], 0.75, 1e-15);
}

TEST(GradEnsemble, TruncatedComponentHasZeroParameterGradient) {
    const CnnConfig cfg = small_config();
    const CnnLayout lay(cfg);
    Rng rng(3);
    CnnParams a = random_params(cfg, rng);
    CnnParams b = a;
    b.flat[lay.head_bias()] = 50.0;  // far above beta
    EnsembleParams ens{{0.4, 0.3}, {a, b}, {a, b}};
    const GradBundle g = grad_ensemble(cfg, ens, random_image(3, rng), -1);
    for (std::size_t i = lay.size(); i < 2 * lay.size(); ++i) EXPECT_EQ(g.d_theta[i], 0.0);
}

TEST(GradEnsemble, MatchesFiniteDifferencesOnSmallInstance) {
    const CnnConfig cfg = small_config();
    Rng rng(11);
    int checked = 0;
    for (int attempt = 0; attempt < 200 && checked < 10; ++attempt) {
        EnsembleParams ens{{0.3, 0.5}, {random_params(cfg, rng), random_params(cfg, rng)}, {}};
        const ImageGrid x = random_image(3, rng);
        bool safe = true;
        for (const auto& th : ens.thetas) {
            const CnnForward fw = cnn_forward(cfg, th, x);
            safe = safe && kink_margin(fw) >= 1e-3 && std::abs(std::abs(fw.value) - cfg.beta) >= 1e-3;
        }
        if (!safe) continue;
        ++checked;
        const GradBundle g = grad_ensemble(cfg, ens, x, 1);
        const std::vector<double> point = flatten_thetas(ens.thetas);
        auto loss = [&](const std::vector<double>& v) {
            EnsembleParams e = ens;
            unflatten_thetas(v, e.thetas);
            return ensemble_loss(cfg, e, x, 1);
        };
        const std::vector<double> fd = finite_diff_grad(loss, point, 1e-5);
        double diff = 0.0, scale = 1e-8;
        for (std::size_t i = 0; i < fd.size(); ++i) {
            diff += (fd[i] - g.d_theta[i]) * (fd[i] - g.d_theta[i]);
            scale = std::max(scale, std::max(std::abs(fd[i]), std::abs(g.d_theta[i])));
        }
        EXPECT_LE(std::sqrt(diff) / scale, 1e-4);
    }
    EXPECT_EQ(checked, 10);
}

TEST(FiniteDiff, Quadratic) {
    const auto g = finite_diff_grad([](const std::vector<double>& v) { return v[0] * v[0] + v[1] * v[1]; }, {1.0, 2.0},
                                    1e-5);
    EXPECT_NEAR(g[0], 2.0, 1e-8);
    EXPECT_NEAR(g[1], 4.0, 1e-8);
}

TEST(FiniteDiff, ConstantGivesZero) {
    const auto g = finite_diff_grad([](const std::vector<double>&) { return 4.2; }, {0.3, -1.0, 7.0}, 1e-5);
    for (double v : g) EXPECT_EQ(v, 0.0);
}

TEST(FiniteDiff, LogisticSlopeAtZero) {
    const auto g = finite_diff_grad([](const std::vector<double>& v) { return logistic_loss(v[0]); }, {0.0}, 1e-5);
    EXPECT_NEAR(g[0], -0.5, 1e-9);
}
