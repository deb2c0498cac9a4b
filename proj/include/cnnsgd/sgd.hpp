#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "cnnsgd/cnn.hpp"

namespace cnnsgd {

using Rng = std::mt19937_64;

struct LabeledSample {
    ImageGrid x;
    int y = 1;
};

struct TrainConfig {
    int K = 64;
    int N = 0;                      // theory block count, 0 when unused
    int I = 0;                      // theory block size, 0 when unused
    long long t = 0;                // total steps, 0 means 10*n
    std::optional<double> lambda;   // step size, defaults to 1/t
    double alpha = 0.125;
    std::optional<double> beta;     // overrides CnnConfig::beta when set
    double B = 1.0;
    std::uint64_t seed = 0;
    bool record_iterates = false;   // keep every w^(t) in the trace

    void validate(std::size_t n) const;
    long long steps(std::size_t n) const { return t > 0 ? t : 10 * static_cast<long long>(n); }
    double step_size(std::size_t n) const { return lambda ? *lambda : 1.0 / static_cast<double>(steps(n)); }
};

EnsembleParams init_params(const CnnConfig& cfg, const TrainConfig& train, Rng& rng);

struct ProjectionInfo {
    int rounds = 0;
    bool converged = false;
};

std::vector<double> project_A(const std::vector<double>& w, double alpha, ProjectionInfo* info = nullptr);
std::vector<double> project_B(const std::vector<double>& theta, const std::vector<double>& theta0);
bool in_A(const std::vector<double>& w, double alpha, double tol = 1e-12);

std::vector<double> flatten_thetas(const std::vector<CnnParams>& thetas);
void unflatten_thetas(const std::vector<double>& flat, std::vector<CnnParams>& thetas);

struct TrainTrace {
    std::vector<double> loss;             // loss at the sample used in step t, before the update
    std::vector<std::uint8_t> proj_A_active;
    std::vector<std::uint8_t> proj_B_active;
    std::vector<std::vector<double>> w_iterates;  // w^(0)..w^(t-1) when recorded
};

struct TrainResult {
    std::vector<double> w_avg;
    std::vector<double> w_final;
    std::vector<CnnParams> thetas;
    std::vector<CnnParams> theta0;
    TrainTrace trace;

    EnsembleParams averaged() const { return EnsembleParams{w_avg, thetas, theta0}; }
};

TrainResult sgd_train(const std::vector<LabeledSample>& data, const CnnConfig& cfg, const TrainConfig& train,
                      Rng& rng);

int classify(const CnnConfig& cfg, const std::vector<double>& w_avg, const std::vector<CnnParams>& thetas,
             const ImageGrid& x);
int sign_label(double f);

// Component networks whose head output weights are all zero, so f == 0 everywhere.
CnnParams zero_network(const CnnConfig& cfg, const CnnParams& like);

// ---- deterministic descent inequality ----
using Vec = std::vector<double>;

struct Lemma1Problem {
    int steps = 0;  // t
    std::function<double(int, const Vec&, const Vec&)> Ft;
    std::function<Vec(int, const Vec&, const Vec&)> grad_Ft;
    std::function<double(const Vec&, const Vec&)> F;
    std::function<Vec(const Vec&, const Vec&)> grad_F;
    std::function<Vec(const Vec&)> proj_A;
    double D = 0.0;
    Vec u0;
    std::vector<Vec> v;  // v_0..v_{t-1}
    Vec u_star;
};

struct Lemma1Result {
    double lhs = 0.0;
    double rhs = 0.0;
    double residual = 0.0;  // inner-product term alone
};

Lemma1Result lemma1_check(const Lemma1Problem& problem);

// Random nonnegative convex quadratics F_t(u,v) = 1/2 |S_t (u - c_t - G_t v)|^2 with F their average,
// A = feasible set of project_A(., alpha), v_t in the unit ball.
Lemma1Problem random_quadratic_problem(int dim_u, int dim_v, int steps, double alpha, Rng& rng);

// ---- checkpoints ----
struct Checkpoint {
    CnnConfig config;
    TrainConfig train;
    std::vector<double> w_avg;
    std::vector<CnnParams> thetas;
    std::vector<CnnParams> theta0;
    std::string rng_state;
};

std::string write_checkpoint(const Checkpoint& ck);
Checkpoint read_checkpoint(const std::string& text);
std::string rng_state(const Rng& rng);
void restore_rng(Rng& rng, const std::string& state);

}  // namespace cnnsgd
