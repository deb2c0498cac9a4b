#include <algorithm>
#include <cmath>
#include <numeric>

#include "cnnsgd/sgd.hpp"

namespace cnnsgd {

namespace {

constexpr double kDykstraTol = 1e-10;
constexpr int kDykstraRounds = 10000;

double norm2(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return s;
}

void to_orthant(std::vector<double>& v) {
    for (double& x : v) x = std::max(0.0, x);
}

void to_halfspace(std::vector<double>& v) {
    const double s = std::accumulate(v.begin(), v.end(), 0.0);
    if (s <= 1.0) return;
    const double shift = (s - 1.0) / static_cast<double>(v.size());
    for (double& x : v) x -= shift;
}

void to_ball(std::vector<double>& v, double radius) {
    const double n = std::sqrt(norm2(v));
    if (n <= radius) return;
    const double f = radius / n;
    for (double& x : v) x *= f;
}

}  // namespace

bool in_A(const std::vector<double>& w, double alpha, double tol) {
    double s = 0.0;
    for (double x : w) {
        if (x < 0.0) return false;
        s += x;
    }
    return s <= 1.0 + tol && norm2(w) <= alpha + tol;
}

std::vector<double> project_A(const std::vector<double>& w, double alpha, ProjectionInfo* info) {
    if (!(alpha >= 0.0)) throw DomainError("project_A: alpha must be nonnegative");
    const std::size_t K = w.size();
    const double radius = std::sqrt(alpha);
    std::vector<double> x = w;
    std::vector<double> p1(K, 0.0), p2(K, 0.0), p3(K, 0.0);
    std::vector<double> y(K);
    int round = 0;
    bool converged = false;
    while (round < kDykstraRounds) {
        ++round;
        const std::vector<double> prev = x, q1 = p1, q2 = p2, q3 = p3;
        for (std::size_t i = 0; i < K; ++i) y[i] = x[i] + p1[i];
        to_orthant(y);
        for (std::size_t i = 0; i < K; ++i) p1[i] = x[i] + p1[i] - y[i];
        x = y;
        for (std::size_t i = 0; i < K; ++i) y[i] = x[i] + p2[i];
        to_halfspace(y);
        for (std::size_t i = 0; i < K; ++i) p2[i] = x[i] + p2[i] - y[i];
        x = y;
        for (std::size_t i = 0; i < K; ++i) y[i] = x[i] + p3[i];
        to_ball(y, radius);
        for (std::size_t i = 0; i < K; ++i) p3[i] = x[i] + p3[i] - y[i];
        x = y;
        double move = 0.0;
        // the iterate can pause while the corrections still move, so both must settle
        for (std::size_t i = 0; i < K; ++i)
            move += (x[i] - prev[i]) * (x[i] - prev[i]) + (p1[i] - q1[i]) * (p1[i] - q1[i]) +
                    (p2[i] - q2[i]) * (p2[i] - q2[i]) + (p3[i] - q3[i]) * (p3[i] - q3[i]);
        if (std::sqrt(move) < kDykstraTol) {
            converged = true;
            break;
        }
    }
    // exact feasibility: clamp, then shrink radially (which keeps both other constraints)
    to_orthant(x);
    const double s = std::accumulate(x.begin(), x.end(), 0.0);
    if (s > 1.0)
        for (double& v : x) v /= s;
    const double n2 = norm2(x);
    if (n2 > alpha) {
        const double f = std::sqrt(alpha / n2);
        for (double& v : x) v *= f;
    }
    // rounding in the rescales can leave either sum a hair above its bound
    while (std::accumulate(x.begin(), x.end(), 0.0) > 1.0 || norm2(x) > alpha)
        for (double& v : x) v = std::nextafter(v, 0.0);
    if (info) {
        info->rounds = round;
        info->converged = converged;
    }
    return x;
}

std::vector<double> project_B(const std::vector<double>& theta, const std::vector<double>& theta0) {
    if (theta.size() != theta0.size()) throw ConfigError("project_B: length mismatch");
    double d2 = 0.0;
    for (std::size_t i = 0; i < theta.size(); ++i) d2 += (theta[i] - theta0[i]) * (theta[i] - theta0[i]);
    if (d2 <= 1.0) return theta;
    const double f = 1.0 / std::sqrt(d2);
    std::vector<double> out(theta.size());
    for (std::size_t i = 0; i < theta.size(); ++i) out[i] = theta0[i] + (theta[i] - theta0[i]) * f;
    return out;
}

}  // namespace cnnsgd
