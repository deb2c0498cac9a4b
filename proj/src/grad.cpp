#include "cnnsgd/grad.hpp"

#include <cmath>

namespace cnnsgd {

void network_grad(const CnnConfig& cfg, const CnnParams& params, const CnnForward& fw, double scale,
                  double* out) {
    const CnnLayout lay(cfg);
    const auto& th = params.flat;
    const FeatureStack& fs = fw.features;
    const int d1 = fs.d1;
    const int d2 = fs.d2;

    out[lay.head_bias()] += scale;
    double d_pool = 0.0;
    for (int i = 0; i < cfg.L2; ++i) {
        const double a = fw.head_pre[i];
        const double on = a >= 0.0 ? 1.0 : 0.0;
        out[lay.head_out(i)] += scale * relu(a);
        const double da = scale * th[lay.head_out(i)] * on;
        out[lay.head_in_bias(i)] += da;
        out[lay.head_in_w(i)] += da * fw.pool_value;
        d_pool += da * th[lay.head_in_w(i)];
    }
    if (d_pool == 0.0) return;

    const int L = cfg.L1;
    const int kl = cfg.channels.back();
    std::vector<double> d_act(fs.maps[L].size(), 0.0);
    const std::size_t top = (static_cast<std::size_t>(fw.pool_i) * d2 + fw.pool_j) * kl;
    for (int s = 0; s < kl; ++s) {
        out[lay.out_w(s)] += d_pool * fs.maps[L][top + s];
        d_act[top + s] = d_pool * th[lay.out_w(s)];
    }

    for (int r = L; r >= 1; --r) {
        const int kin = fs.channels[r - 1];
        const int kout = fs.channels[r];
        const int m = cfg.filter_sizes[r - 1];
        const std::vector<double>& pre = fs.preact[r - 1];
        const std::vector<double>& prev = fs.maps[r - 1];
        std::vector<double> d_prev;
        if (r > 1) d_prev.assign(prev.size(), 0.0);
        for (int i = 0; i < d1; ++i) {
            for (int j = 0; j < d2; ++j) {
                const std::size_t cell = (static_cast<std::size_t>(i) * d2 + j) * kout;
                for (int s2 = 0; s2 < kout; ++s2) {
                    const double g = pre[cell + s2] >= 0.0 ? d_act[cell + s2] : 0.0;
                    if (g == 0.0) continue;
                    out[lay.conv_b(r, s2)] += g;
                    for (int t1 = 0; t1 < m && i + t1 < d1; ++t1) {
                        for (int t2 = 0; t2 < m && j + t2 < d2; ++t2) {
                            const std::size_t src = (static_cast<std::size_t>(i + t1) * d2 + j + t2) * kin;
                            for (int s1 = 0; s1 < kin; ++s1) {
                                const std::size_t wi = lay.conv_w(r, t1, t2, s1, s2);
                                out[wi] += g * prev[src + s1];
                                if (r > 1) d_prev[src + s1] += g * th[wi];
                            }
                        }
                    }
                }
            }
        }
        d_act = std::move(d_prev);
    }
}

GradBundle grad_ensemble(const CnnConfig& cfg, const EnsembleParams& ens, const std::vector<CnnForward>& fws,
                         int y) {
    if (y != 1 && y != -1) throw DomainError("label must be -1 or +1");
    const std::size_t K = ens.K();
    if (ens.thetas.size() != K || fws.size() != K) throw ConfigError("ensemble size mismatch");
    const std::size_t P = CnnLayout(cfg).size();

    double f = 0.0;
    std::vector<double> tf(K);
    for (std::size_t k = 0; k < K; ++k) {
        tf[k] = truncate(cfg.beta, fws[k].value);
        f += ens.w[k] * tf[k];
    }
    // d/dz log(1+exp(-z)) at z = y f, times dz/df = y
    const double dphi = y * logistic_loss_derivative(y * f);

    GradBundle g;
    g.d_w.resize(K);
    g.d_theta.assign(K * P, 0.0);
    for (std::size_t k = 0; k < K; ++k) {
        g.d_w[k] = dphi * tf[k];
        const bool gate = std::abs(fws[k].value) <= cfg.beta;
        const double scale = dphi * ens.w[k];
        if (!gate || scale == 0.0) continue;
        network_grad(cfg, ens.thetas[k], fws[k], scale, g.d_theta.data() + k * P);
    }
    return g;
}

GradBundle grad_ensemble(const CnnConfig& cfg, const EnsembleParams& ens, const ImageGrid& x, int y) {
    std::vector<CnnForward> fws;
    fws.reserve(ens.K());
    for (const auto& th : ens.thetas) fws.push_back(cnn_forward(cfg, th, x));
    return grad_ensemble(cfg, ens, fws, y);
}

double ensemble_loss(const CnnConfig& cfg, const EnsembleParams& ens, const ImageGrid& x, int y) {
    return logistic_loss(y * ensemble_eval(cfg, ens, x));
}

std::vector<double> finite_diff_grad(const std::function<double(const std::vector<double>&)>& loss_fn,
                                     const std::vector<double>& point, double h) {
    if (!(h > 0.0)) throw DomainError("finite_diff_grad: step must be positive");
    std::vector<double> p = point;
    std::vector<double> g(point.size());
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double orig = p[i];
        p[i] = orig + h;
        const double fp = loss_fn(p);
        p[i] = orig - h;
        const double fm = loss_fn(p);
        p[i] = orig;
        g[i] = (fp - fm) / (2.0 * h);
    }
    return g;
}

}  // namespace cnnsgd
