#include "cnnsgd/cnn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace cnnsgd {

ImageGrid::ImageGrid(int d1, int d2, std::vector<double> pixels) : d1_(d1), d2_(d2), px_(std::move(pixels)) {
    if (d1 < 1 || d2 < 1) throw ConfigError("image dimensions must be positive");
    if (px_.size() != static_cast<std::size_t>(d1) * d2) throw ConfigError("pixel count does not match d1*d2");
    for (double v : px_) {
        if (!(v >= 0.0 && v <= 1.0)) throw DomainError("pixel value outside [0,1]");
    }
}

ImageGrid ImageGrid::filled(int d1, int d2, double value) {
    return ImageGrid(d1, d2, std::vector<double>(static_cast<std::size_t>(d1) * d2, value));
}

void CnnConfig::validate() const {
    if (L1 < 1) throw ConfigError("L1 must be at least 1");
    if (static_cast<int>(channels.size()) != L1 || static_cast<int>(filter_sizes.size()) != L1)
        throw ConfigError("channels and filter_sizes must have L1 entries");
    for (int k : channels)
        if (k < 1) throw ConfigError("channel counts must be positive");
    for (int m : filter_sizes)
        if (m < 1) throw ConfigError("filter sizes must be positive");
    if (L2 < 1) throw ConfigError("L2 must be at least 1");
    if (!(beta >= 0.0)) throw ConfigError("beta must be nonnegative");
}

void CnnConfig::validate_for(int d1, int d2) const {
    validate();
    for (int m : filter_sizes)
        if (m > std::min(d1, d2)) throw ConfigError("filter size exceeds image dimensions");
}

int CnnConfig::max_channels() const { return *std::max_element(channels.begin(), channels.end()); }
int CnnConfig::max_filter() const { return *std::max_element(filter_sizes.begin(), filter_sizes.end()); }

CnnLayout::CnnLayout(const CnnConfig& cfg) : k_(cfg.channels), m_(cfg.filter_sizes) {
    cfg.validate();
    std::size_t off = 0;
    for (int r = 1; r <= cfg.L1; ++r) {
        w_off_.push_back(off);
        off += static_cast<std::size_t>(m_[r - 1]) * m_[r - 1] * in_channels(r) * k_[r - 1];
        bias_off_.push_back(off);
        off += k_[r - 1];
    }
    out_off_ = off;
    off += k_.back();
    head_off_ = off;
    off += 1 + 3 * static_cast<std::size_t>(cfg.L2);
    size_ = off;
}

std::size_t CnnLayout::conv_w(int r, int t1, int t2, int s1, int s2) const {
    const std::size_t m = m_[r - 1];
    const std::size_t kin = in_channels(r);
    const std::size_t kout = k_[r - 1];
    return w_off_[r - 1] + ((t1 * m + t2) * kin + s1) * kout + s2;
}

CnnParams CnnParams::zeros(const CnnConfig& cfg) {
    return CnnParams{std::vector<double>(CnnLayout(cfg).size(), 0.0)};
}

void CnnParams::check_shape(const CnnConfig& cfg) const {
    if (flat.size() != CnnLayout(cfg).size()) throw ConfigError("parameter vector does not match configuration");
}

double relu(double z) { return z > 0.0 ? z : 0.0; }

double logistic_loss(double z) {
    if (!std::isfinite(z)) throw DomainError("logistic_loss: non-finite argument");
    if (z >= 0.0) return std::log1p(std::exp(-z));
    return -z + std::log1p(std::exp(z));
}

double logistic_loss_derivative(double z) {
    // -1/(1+e^z), evaluated without overflow
    if (z >= 0.0) {
        const double e = std::exp(-z);
        return -e / (1.0 + e);
    }
    return -1.0 / (1.0 + std::exp(z));
}

double truncate(double beta, double z) { return std::max(-beta, std::min(beta, z)); }

CnnForward cnn_forward(const CnnConfig& cfg, const CnnParams& params, const ImageGrid& x) {
    cfg.validate_for(x.d1(), x.d2());
    params.check_shape(cfg);
    const CnnLayout lay(cfg);
    const auto& th = params.flat;
    const int d1 = x.d1();
    const int d2 = x.d2();

    CnnForward out;
    FeatureStack& fs = out.features;
    fs.d1 = d1;
    fs.d2 = d2;
    fs.channels.push_back(1);
    fs.maps.push_back(x.pixels());

    for (int r = 1; r <= cfg.L1; ++r) {
        const int kin = fs.channels.back();
        const int kout = cfg.channels[r - 1];
        const int m = cfg.filter_sizes[r - 1];
        const std::vector<double>& prev = fs.maps.back();
        std::vector<double> pre(static_cast<std::size_t>(d1) * d2 * kout);
        for (int i = 0; i < d1; ++i) {
            for (int j = 0; j < d2; ++j) {
                double* cell = &pre[(static_cast<std::size_t>(i) * d2 + j) * kout];
                for (int s2 = 0; s2 < kout; ++s2) cell[s2] = th[lay.conv_b(r, s2)];
                // zero padding: taps leaving the grid are simply absent
                for (int t1 = 0; t1 < m && i + t1 < d1; ++t1) {
                    for (int t2 = 0; t2 < m && j + t2 < d2; ++t2) {
                        const double* src = &prev[(static_cast<std::size_t>(i + t1) * d2 + j + t2) * kin];
                        for (int s1 = 0; s1 < kin; ++s1) {
                            const double v = src[s1];
                            if (v == 0.0) continue;
                            const double* w = &th[lay.conv_w(r, t1, t2, s1, 0)];
                            for (int s2 = 0; s2 < kout; ++s2) cell[s2] += w[s2] * v;
                        }
                    }
                }
            }
        }
        std::vector<double> act(pre.size());
        for (std::size_t q = 0; q < pre.size(); ++q) act[q] = relu(pre[q]);
        fs.channels.push_back(kout);
        fs.preact.push_back(std::move(pre));
        fs.maps.push_back(std::move(act));
    }

    const int kl = cfg.channels.back();
    const int ml = cfg.filter_sizes.back();
    const std::vector<double>& top = fs.maps.back();
    double best = -std::numeric_limits<double>::infinity();
    double second = -std::numeric_limits<double>::infinity();
    for (int i = 0; i + ml <= d1; ++i) {
        for (int j = 0; j + ml <= d2; ++j) {
            const double* cell = &top[(static_cast<std::size_t>(i) * d2 + j) * kl];
            double v = 0.0;
            for (int s = 0; s < kl; ++s) v += th[lay.out_w(s)] * cell[s];
            if (v > best) {
                second = best;
                best = v;
                out.pool_i = i;
                out.pool_j = j;
            } else if (v > second) {
                second = v;
            }
        }
    }
    out.pool_value = best;
    out.pool_gap = std::isinf(second) ? std::numeric_limits<double>::infinity() : best - second;

    double g = th[lay.head_bias()];
    out.head_pre.resize(cfg.L2);
    for (int i = 0; i < cfg.L2; ++i) {
        const double a = th[lay.head_in_w(i)] * best + th[lay.head_in_bias(i)];
        out.head_pre[i] = a;
        g += th[lay.head_out(i)] * relu(a);
    }
    out.value = g;
    return out;
}

double cnn_value(const CnnConfig& cfg, const CnnParams& params, const ImageGrid& x) {
    return cnn_forward(cfg, params, x).value;
}

double kink_margin(const CnnForward& fw) {
    double m = fw.pool_gap;
    for (const auto& layer : fw.features.preact)
        for (double z : layer) m = std::min(m, std::abs(z));
    for (double z : fw.head_pre) m = std::min(m, std::abs(z));
    return m;
}

double ensemble_eval(const CnnConfig& cfg, const EnsembleParams& ens, const ImageGrid& x) {
    if (ens.thetas.size() != ens.w.size()) throw ConfigError("ensemble weight count does not match components");
    double f = 0.0;
    for (std::size_t k = 0; k < ens.w.size(); ++k) {
        if (ens.w[k] == 0.0) continue;
        f += ens.w[k] * truncate(cfg.beta, cnn_value(cfg, ens.thetas[k], x));
    }
    return f;
}

int schedule_pi(int s, int l, long long Q) {
    int pi = 0;
    for (int i = 1; i <= l; ++i) {
        long long threshold = i;
        long long pw = 1;
        for (int r = 1; r <= l - 1; ++r) {
            pw *= 4;
            if (r >= l - i + 1) threshold += pw * Q;
        }
        if (s >= threshold) ++pi;
    }
    return pi;
}

ArchitectureSchedule theorem2_architecture(double n, double p, int l, double c5, double c6, int c7, double c3) {
    if (n < 1 || p < 1 || l < 1) throw ConfigError("theorem2_architecture needs n >= 1, p >= 1, l >= 1");
    if (c7 < 1) throw ConfigError("c7 must be a positive integer");
    ArchitectureSchedule out;
    out.Q = static_cast<int>(std::ceil(c5 * std::pow(n, 2.0 / (2.0 * p + 4.0))));
    if (out.Q < 1) out.Q = 1;
    long long pow4 = 1;
    for (int i = 0; i < l; ++i) pow4 *= 4;
    const long long L1 = (pow4 - 1) / 3 * out.Q + l;
    CnnConfig& cfg = out.config;
    cfg.L1 = static_cast<int>(L1);
    cfg.L2 = std::max(1, static_cast<int>(std::ceil(c6 * std::pow(n, 0.25))));
    cfg.beta = c3 * std::log(n);
    for (int s = 1; s <= cfg.L1; ++s) {
        const int pi = schedule_pi(s, l, out.Q);
        out.pi.push_back(pi);
        cfg.filter_sizes.push_back(1 << pi);
        cfg.channels.push_back(c7);
    }
    return out;
}

}  // namespace cnnsgd
