#include "cnnsgd/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace cnnsgd {

std::optional<double> BoundReport::margin() const {
    if (!empirical_value) return std::nullopt;
    return formula_value - *empirical_value;
}

std::string BoundReport::csv_header() { return "name,formula_value,empirical_value,margin"; }

std::string BoundReport::csv_row() const {
    char buf[64];
    std::string row = name + ",";
    std::snprintf(buf, sizeof buf, "%.17g", formula_value);
    row += buf;
    row += ",";
    if (empirical_value) {
        std::snprintf(buf, sizeof buf, "%.17g", *empirical_value);
        row += buf;
        std::snprintf(buf, sizeof buf, ",%.17g", *margin());
        row += buf;
    } else {
        row += ",";
    }
    return row;
}

double lipschitz_bound_log(const CnnConfig& cfg, double B) {
    if (B < 0.0) throw DomainError("lipschitz bound needs B >= 0");
    cfg.validate();
    const double L1 = cfg.L1, L2 = cfg.L2, k = cfg.max_channels(), M = cfg.max_filter();
    return std::log(7.0) + std::log(L2) + std::log(L1) + (L1 + 1) * std::log(k) + L1 * std::log(M * M + 1.0) +
           (L1 + 3) * std::log(B + 1.0);
}

double lipschitz_bound(const CnnConfig& cfg, double B) {
    if (B < 0.0) throw DomainError("lipschitz bound needs B >= 0");
    cfg.validate();
    const int L1 = cfg.L1;
    const double k = cfg.max_channels(), M = cfg.max_filter();
    return 7.0 * cfg.L2 * L1 * std::pow(k, L1 + 1) * std::pow(M * M + 1.0, L1) * std::pow(B + 1.0, L1 + 3);
}

double empirical_lipschitz(const CnnConfig& cfg, const CnnParams& theta, const CnnParams& theta_bar,
                           const std::vector<ImageGrid>& images) {
    theta.check_shape(cfg);
    theta_bar.check_shape(cfg);
    double dist = 0.0;
    for (std::size_t i = 0; i < theta.flat.size(); ++i)
        dist = std::max(dist, std::abs(theta.flat[i] - theta_bar.flat[i]));
    if (dist == 0.0) return 0.0;
    if (dist > 1.0 + 1e-12) throw DomainError("parameters differ by more than 1 in the sup norm");
    double best = 0.0;
    for (const auto& x : images)
        best = std::max(best, std::abs(cnn_value(cfg, theta, x) - cnn_value(cfg, theta_bar, x)));
    return best / dist;
}

double grad_sup_bound_log(const CnnConfig& cfg, double B) {
    if (B < 1.0) throw DomainError("gradient bound needs B >= 1");
    cfg.validate();
    const double L1 = cfg.L1, k = cfg.max_channels(), M = cfg.max_filter();
    return std::log(static_cast<double>(cfg.L2)) + (2 * L1 + 1) * std::log(k) +
           (2 * L1 + 2) * std::log(M * M + 1.0) + (2 * L1 + 2) * std::log(B);
}

double grad_sup_bound(const CnnConfig& cfg, double B) {
    if (B < 1.0) throw DomainError("gradient bound needs B >= 1");
    cfg.validate();
    const int L1 = cfg.L1;
    const double k = cfg.max_channels(), M = cfg.max_filter();
    return cfg.L2 * std::pow(k, 2 * L1 + 1) * std::pow(M * M + 1.0, 2 * L1 + 2) * std::pow(B, 2 * L1 + 2);
}

StructuralBound vc_structural_bound(int L1, int L2) {
    if (L1 < 2 || L2 < 2) throw DomainError("structural bound needs L1, L2 >= 2");
    const double a = L1, b = L2;
    return {(a * a + a * b) * std::log(std::max(a, b)), true};
}

double hierarchy_error_bound(int t, double C, int l, double eps) {
    if (!(C > 0.0) || eps < 0.0 || t < 1 || l < 0) throw DomainError("hierarchy bound needs C > 0, eps >= 0");
    return std::sqrt(static_cast<double>(t)) * std::pow(2.0 * C + 1.0, l) * eps;
}

}  // namespace cnnsgd
