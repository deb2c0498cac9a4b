#pragma once

#include <functional>
#include <vector>

#include "cnnsgd/cnn.hpp"

namespace cnnsgd {

struct GradBundle {
    std::vector<double> d_w;      // K entries
    std::vector<double> d_theta;  // K blocks of CnnLayout::size(), component order
};

// Gradient of a single network value f_theta(x) with respect to theta, using the forward pass
// (and hence its frozen argmax). Subgradient conventions: relu'(z) = 1 iff z >= 0.
void network_grad(const CnnConfig& cfg, const CnnParams& params, const CnnForward& fw, double scale,
                  double* out);

// Gradient of logistic_loss(y * f_(w,theta)(x)).
GradBundle grad_ensemble(const CnnConfig& cfg, const EnsembleParams& ens, const ImageGrid& x, int y);

// Same, reusing forward passes already computed for every component.
GradBundle grad_ensemble(const CnnConfig& cfg, const EnsembleParams& ens, const std::vector<CnnForward>& fws,
                         int y);

double ensemble_loss(const CnnConfig& cfg, const EnsembleParams& ens, const ImageGrid& x, int y);

std::vector<double> finite_diff_grad(const std::function<double(const std::vector<double>&)>& loss_fn,
                                     const std::vector<double>& point, double h);

}  // namespace cnnsgd
