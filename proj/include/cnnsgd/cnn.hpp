#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace cnnsgd {

struct ConfigError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct DomainError : std::domain_error {
    using std::domain_error::domain_error;
};

// Grey-scale image, pixel (i, j) with i < d1 and j < d2, stored i-major.
class ImageGrid {
public:
    ImageGrid() = default;
    ImageGrid(int d1, int d2, std::vector<double> pixels);
    static ImageGrid filled(int d1, int d2, double value);

    int d1() const { return d1_; }
    int d2() const { return d2_; }
    double at(int i, int j) const { return px_[static_cast<std::size_t>(i) * d2_ + j]; }
    const std::vector<double>& pixels() const { return px_; }

private:
    int d1_ = 0;
    int d2_ = 0;
    std::vector<double> px_;
};

struct CnnConfig {
    int L1 = 1;
    std::vector<int> channels;      // k_1..k_L1
    std::vector<int> filter_sizes;  // M_1..M_L1
    int L2 = 1;
    double beta = 1.0;

    void validate() const;
    void validate_for(int d1, int d2) const;
    int max_channels() const;
    int max_filter() const;
};

// Offsets of every weight group inside the flat parameter vector of one network.
class CnnLayout {
public:
    explicit CnnLayout(const CnnConfig& cfg);

    std::size_t size() const { return size_; }
    int in_channels(int r) const { return r == 0 ? 1 : k_[r - 1]; }

    // r is 1-based layer, t1/t2/s1/s2 are 0-based
    std::size_t conv_w(int r, int t1, int t2, int s1, int s2) const;
    std::size_t conv_b(int r, int s2) const { return bias_off_[r - 1] + s2; }
    std::size_t out_w(int s) const { return out_off_ + s; }
    std::size_t head_bias() const { return head_off_; }             // w_0^(1)
    std::size_t head_out(int i) const { return head_off_ + 1 + 3 * i; }   // w_i^(1)
    std::size_t head_in_bias(int i) const { return head_off_ + 2 + 3 * i; } // w_{i,0}^(0)
    std::size_t head_in_w(int i) const { return head_off_ + 3 + 3 * i; }    // w_{i,1}^(0)

    std::size_t head_offset() const { return head_off_; }
    std::size_t out_offset() const { return out_off_; }

private:
    std::vector<int> k_;
    std::vector<int> m_;
    std::vector<std::size_t> w_off_;
    std::vector<std::size_t> bias_off_;
    std::size_t out_off_ = 0;
    std::size_t head_off_ = 0;
    std::size_t size_ = 0;
};

struct CnnParams {
    std::vector<double> flat;

    static CnnParams zeros(const CnnConfig& cfg);
    void check_shape(const CnnConfig& cfg) const;
};

// Feature maps o^(r), r = 0..L1, each d1*d2*k_r with index (i*d2 + j)*k_r + s.
struct FeatureStack {
    int d1 = 0;
    int d2 = 0;
    std::vector<int> channels;  // channels[0] = 1
    std::vector<std::vector<double>> maps;
    std::vector<std::vector<double>> preact;  // preact[r-1] pairs with maps[r]

    double at(int r, int i, int j, int s) const {
        return maps[r][(static_cast<std::size_t>(i) * d2 + j) * channels[r] + s];
    }
};

struct CnnForward {
    double value = 0.0;
    double pool_value = 0.0;
    int pool_i = 0;
    int pool_j = 0;
    double pool_gap = 0.0;  // max minus runner-up over window positions, +inf if single position
    std::vector<double> head_pre;
    FeatureStack features;
};

double relu(double z);
double logistic_loss(double z);
double logistic_loss_derivative(double z);
double truncate(double beta, double z);

CnnForward cnn_forward(const CnnConfig& cfg, const CnnParams& params, const ImageGrid& x);
double cnn_value(const CnnConfig& cfg, const CnnParams& params, const ImageGrid& x);

// Smallest distance of any ReLU preactivation to 0, together with the pool gap.
double kink_margin(const CnnForward& fw);

struct EnsembleParams {
    std::vector<double> w;
    std::vector<CnnParams> thetas;
    std::vector<CnnParams> theta0;

    std::size_t K() const { return w.size(); }
};

double ensemble_eval(const CnnConfig& cfg, const EnsembleParams& ens, const ImageGrid& x);

struct ArchitectureSchedule {
    CnnConfig config;
    int Q = 0;
    std::vector<int> pi;  // pi[s-1]
};

int schedule_pi(int s, int l, long long Q);
ArchitectureSchedule theorem2_architecture(double n, double p, int l, double c5 = 1.0, double c6 = 1.0,
                                           int c7 = 8, double c3 = 1.0);

}  // namespace cnnsgd
