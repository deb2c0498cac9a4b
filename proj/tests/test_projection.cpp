#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "cnnsgd/sgd.hpp"
#include "cnnsgd/verify.hpp"

using namespace cnnsgd;

namespace {

double dist(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(s);
}

bool feasible(const std::vector<double>& p, double alpha, double tol) {
    double s = 0.0, q = 0.0;
    for (double v : p) {
        if (v < -tol) return false;
        s += v;
        q += v * v;
    }
    return s <= 1.0 + tol && q <= alpha + tol;
}

// Exact projection by enumerating supports and the four active-constraint patterns on each.
std::vector<double> kkt_projection(const std::vector<double>& y, double alpha) {
    const std::size_t K = y.size();
    std::vector<double> best(K, 0.0);
    double best_d = dist(best, y);
    for (unsigned mask = 1; mask < (1u << K); ++mask) {
        std::vector<std::size_t> S;
        for (std::size_t i = 0; i < K; ++i)
            if (mask & (1u << i)) S.push_back(i);
        const double m = static_cast<double>(S.size());
        double sum = 0.0, sq = 0.0;
        for (auto i : S) {
            sum += y[i];
            sq += y[i] * y[i];
        }
        std::vector<std::vector<double>> cands;
        auto make = [&](auto value) {
            std::vector<double> p(K, 0.0);
            for (auto i : S) p[i] = value(i);
            cands.push_back(p);
        };
        make([&](std::size_t i) { return y[i]; });
        make([&](std::size_t i) { return y[i] - (sum - 1.0) / m; });
        if (sq > 0) make([&](std::size_t i) { return y[i] * std::sqrt(alpha / sq); });
        double uu = 0.0;
        for (auto i : S) uu += (y[i] - sum / m) * (y[i] - sum / m);
        if (uu > 0 && alpha >= 1.0 / m) {
            const double c = std::sqrt((alpha - 1.0 / m) / uu);
            make([&](std::size_t i) { return c * (y[i] - sum / m) + 1.0 / m; });
        }
        for (const auto& p : cands)
            if (feasible(p, alpha, 1e-13) && dist(p, y) < best_d) {
                best_d = dist(p, y);
                best = p;
            }
    }
    return best;
}

}  // namespace

TEST(ProjectA, FeasiblePointUnchanged) {
    const std::vector<double> w{0.1, 0.2, 0.05};
    const auto p = project_A(w, 0.5);
    for (std::size_t i = 0; i < w.size(); ++i) EXPECT_NEAR(p[i], w[i], 1e-12);
}

TEST(ProjectA, MassConstraint) {
    const auto p = project_A({2.0, 0.0}, 1.0);
    EXPECT_NEAR(p[0], 1.0, 1e-9);
    EXPECT_NEAR(p[1], 0.0, 1e-9);
}

TEST(ProjectA, NegativeOrthantGoesToZero) {
    for (double alpha : {0.0, 0.3, 1.0}) {
        const auto p = project_A({-1.0, -1.0}, alpha);
        EXPECT_EQ(p[0], 0.0);
        EXPECT_EQ(p[1], 0.0);
    }
}

TEST(ProjectA, MatchesExactOracleAndIsExactlyFeasible) {
    Rng rng(17);
    std::uniform_real_distribution<double> u(-0.5, 1.5), a(0.02, 1.0);
    std::uniform_int_distribution<int> dim(1, 4);
    for (int i = 0; i < 300; ++i) {
        std::vector<double> y(dim(rng));
        for (auto& v : y) v = u(rng);
        const double alpha = a(rng);
        const auto p = project_A(y, alpha);
        EXPECT_LE(dist(p, kkt_projection(y, alpha)), 1e-7);
        EXPECT_TRUE(in_A(p, alpha, 0.0));
    }
}

TEST(ProjectA, ReportsConvergence) {
    ProjectionInfo info;
    project_A({0.9, 0.8, 0.7}, 0.2, &info);
    EXPECT_TRUE(info.converged);
    EXPECT_GT(info.rounds, 0);
}

TEST(ProjectA, RejectsNegativeAlpha) { EXPECT_THROW(project_A({0.1}, -1.0), DomainError); }

TEST(GridOracle, PlainAndRefinedGrids) {
    const std::vector<double> y{2.0, 0.0};
    const auto coarse = grid_projection(y, 1.0, 0.005, 0);
    EXPECT_NEAR(coarse[0], 1.0, 1e-12);
    const std::vector<double> z{1.4274, -0.079145, 1.416886};
    const auto fine = grid_projection(z, 0.365398, 0.005, 4);
    EXPECT_LE(dist(fine, kkt_projection(z, 0.365398)), 1e-4);
}

TEST(ProjectB, Cases) {
    const std::vector<double> t0{1.0, -1.0};
    EXPECT_EQ(project_B(t0, t0), t0);
    const auto mid = project_B({1.0, 1.0}, t0);
    EXPECT_NEAR(mid[0], 1.0, 1e-15);
    EXPECT_NEAR(mid[1], 0.0, 1e-15);
    const std::vector<double> inside{1.0, -0.5};
    EXPECT_EQ(project_B(inside, t0), inside);
    EXPECT_THROW(project_B({1.0}, t0), ConfigError);
}
