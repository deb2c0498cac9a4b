#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cnnsgd/cnn.hpp"
#include "cnnsgd/sgd.hpp"

namespace cnnsgd {

struct BoundReport {
    std::string name;
    double formula_value = 0.0;
    std::optional<double> empirical_value;

    std::optional<double> margin() const;
    bool dominates() const { return !margin() || *margin() >= 0.0; }
    static std::string csv_header();
    std::string csv_row() const;
};

// Lipschitz constant of theta -> f_theta in the sup norm, for weights bounded by B.
double lipschitz_bound(const CnnConfig& cfg, double B);
double lipschitz_bound_log(const CnnConfig& cfg, double B);  // natural log, finite when the value overflows

// max over images of |f_theta(x) - f_theta_bar(x)| / |theta - theta_bar|_inf
double empirical_lipschitz(const CnnConfig& cfg, const CnnParams& theta, const CnnParams& theta_bar,
                           const std::vector<ImageGrid>& images);

// Sup norm of the parameter gradient of the logistic loss of an ensemble.
double grad_sup_bound(const CnnConfig& cfg, double B);
double grad_sup_bound_log(const CnnConfig& cfg, double B);

struct StructuralBound {
    double value = 0.0;
    bool constant_unspecified = true;  // the leading constant is taken as 1
};

StructuralBound vc_structural_bound(int L1, int L2);

struct RademacherConfig {
    double B = 1.0;         // parameter box |theta|_inf <= B
    double beta = 1.0;      // truncation level
    int trials = 20;
    int restarts = 8;       // random starting points per trial
    int climb_steps = 60;   // coordinate proposals per restart
    std::uint64_t seed = 0;
    int threads = 0;        // 0 = hardware concurrency
};

struct RademacherEstimate {
    double mean = 0.0;  // lower estimate of E sup |(1/n) sum eps_i T f(x_i)|
    std::vector<double> per_trial;
};

RademacherEstimate rademacher_mc(const CnnConfig& cfg, const std::vector<ImageGrid>& images,
                                 const RademacherConfig& rc);

// sqrt(t) (2C + 1)^l eps
double hierarchy_error_bound(int t, double C, int l, double eps);

}  // namespace cnnsgd
