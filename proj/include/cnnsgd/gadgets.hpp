#pragma once

#include <vector>

#include "cnnsgd/ffnet.hpp"

namespace cnnsgd {

// 2 sigma(x) - 4 sigma(x - 1/2) + 2 sigma(x - 1)
FeedForwardNet build_tooth_net();

// S_R(x) = x - sum_{s<=R} g_s(x)/4^s, the interpolant of x^2 on [0,1]; width 7, all weights <= 1
FeedForwardNet build_square01_net(int R);
FeedForwardNet build_square_net(int R, double a);
FeedForwardNet build_mult_net(int R, double a);
FeedForwardNet build_multd_net(int R, int d, double a);
double multd_min_depth(int d, double a);  // log_4(2 * 4^(2d) * a^(2d))

// Multi-indices of total degree <= N in d variables, graded lexicographic order.
std::vector<std::vector<int>> graded_lex_monomials(int d, int N);

// Inputs (x_1..x_d, y_1..y_D); approximates sum_i r_i * y_i * x^{m_i}.
FeedForwardNet build_poly_net(int R, int N, int d, const std::vector<double>& coeffs, double a = 1.0);

FeedForwardNet build_indicator_net(const std::vector<double>& a, const std::vector<double>& b, double R);
// Inputs (x, a, b, s), each of x, a, b having d coordinates.
FeedForwardNet build_test_net(int d, double R);
FeedForwardNet build_test_net(const std::vector<double>& a, const std::vector<double>& b, double s, double R);
FeedForwardNet build_trunc_net(double R, int B);

// printed error and weight bounds
double square_error_bound(int R, double a);
double square_weight_bound(double a);
double mult_error_bound(int R, double a);
double mult_weight_bound(double a);
double multd_error_bound(int R, int d, double a);
double multd_weight_bound(int d, double a);
double poly_error_bound(int R, int N, int d, const std::vector<double>& coeffs, double a);
double poly_weight_bound(int N, const std::vector<double>& coeffs, double a);
double indicator_weight_bound(const std::vector<double>& a, const std::vector<double>& b, double R);
double test_weight_bound(double R);
double trunc_weight_bound(double R, int B);

}  // namespace cnnsgd
