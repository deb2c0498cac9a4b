#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "cnnsgd/grad.hpp"
#include "cnnsgd/sgd.hpp"

namespace cnnsgd {

void TrainConfig::validate(std::size_t n) const {
    if (K < 1) throw ConfigError("K must be positive");
    if (N > 0 && I > 0 && K != N * I) throw ConfigError("K must equal N*I");
    if (n == 0) throw ConfigError("training data is empty");
    if (steps(n) % static_cast<long long>(n) != 0) throw ConfigError("t must be a multiple of n");
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw ConfigError("alpha must lie in [0,1]");
    if (lambda && !(*lambda >= 0.0)) throw ConfigError("lambda must be nonnegative");
    if (!(B >= 0.0)) throw ConfigError("B must be nonnegative");
}

EnsembleParams init_params(const CnnConfig& cfg, const TrainConfig& train, Rng& rng) {
    const std::size_t P = CnnLayout(cfg).size();
    EnsembleParams ens;
    ens.w.assign(train.K, 0.0);
    std::uniform_real_distribution<double> unif(-train.B, train.B);
    for (int k = 0; k < train.K; ++k) {
        CnnParams th{std::vector<double>(P)};
        for (double& v : th.flat) v = train.B > 0.0 ? unif(rng) : 0.0;
        ens.thetas.push_back(th);
    }
    ens.theta0 = ens.thetas;
    return ens;
}

std::vector<double> flatten_thetas(const std::vector<CnnParams>& thetas) {
    std::vector<double> out;
    for (const auto& t : thetas) out.insert(out.end(), t.flat.begin(), t.flat.end());
    return out;
}

void unflatten_thetas(const std::vector<double>& flat, std::vector<CnnParams>& thetas) {
    std::size_t off = 0;
    for (auto& t : thetas) {
        std::copy(flat.begin() + off, flat.begin() + off + t.flat.size(), t.flat.begin());
        off += t.flat.size();
    }
    if (off != flat.size()) throw ConfigError("flat parameter length mismatch");
}

TrainResult sgd_train(const std::vector<LabeledSample>& data, const CnnConfig& cfg_in, const TrainConfig& train,
                      Rng& rng) {
    const std::size_t n = data.size();
    train.validate(n);
    CnnConfig cfg = cfg_in;
    if (train.beta) cfg.beta = *train.beta;
    cfg.validate();
    for (const auto& s : data) {
        cfg.validate_for(s.x.d1(), s.x.d2());
        if (s.y != 1 && s.y != -1) throw DomainError("labels must be -1 or +1");
    }

    EnsembleParams ens = init_params(cfg, train, rng);
    const long long T = train.steps(n);
    const double lambda = train.step_size(n);
    const std::size_t K = ens.K();

    std::vector<double> theta = flatten_thetas(ens.thetas);
    const std::vector<double> theta0 = theta;
    std::vector<double> w_sum(K, 0.0);

    TrainResult res;
    res.trace.loss.reserve(T);
    res.trace.proj_A_active.reserve(T);
    res.trace.proj_B_active.reserve(T);

    std::vector<std::size_t> order(n);
    std::vector<CnnForward> fws(K);
    long long step = 0;
    for (long long pass = 0; pass < T / static_cast<long long>(n); ++pass) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::shuffle(order.begin(), order.end(), rng);
        for (std::size_t idx : order) {
            const LabeledSample& s = data[idx];
            for (std::size_t k = 0; k < K; ++k) fws[k] = cnn_forward(cfg, ens.thetas[k], s.x);
            double f = 0.0;
            for (std::size_t k = 0; k < K; ++k) f += ens.w[k] * truncate(cfg.beta, fws[k].value);
            res.trace.loss.push_back(logistic_loss(s.y * f));
            if (train.record_iterates) res.trace.w_iterates.push_back(ens.w);
            for (std::size_t k = 0; k < K; ++k) w_sum[k] += ens.w[k];

            const GradBundle g = grad_ensemble(cfg, ens, fws, s.y);
            std::vector<double> w_new(K);
            for (std::size_t k = 0; k < K; ++k) w_new[k] = ens.w[k] - lambda * g.d_w[k];
            std::vector<double> w_proj = project_A(w_new, train.alpha);
            res.trace.proj_A_active.push_back(w_proj != w_new ? 1 : 0);
            ens.w = std::move(w_proj);

            std::vector<double> th_new(theta.size());
            for (std::size_t i = 0; i < theta.size(); ++i) th_new[i] = theta[i] - lambda * g.d_theta[i];
            std::vector<double> th_proj = project_B(th_new, theta0);
            res.trace.proj_B_active.push_back(th_proj != th_new ? 1 : 0);
            theta = std::move(th_proj);
            unflatten_thetas(theta, ens.thetas);

            if (!in_A(ens.w, train.alpha)) throw std::logic_error("sgd_train: outer weights left A");
            double dist = 0.0;
            for (std::size_t i = 0; i < theta.size(); ++i) dist += (theta[i] - theta0[i]) * (theta[i] - theta0[i]);
            if (dist > 1.0 + 1e-12) throw std::logic_error("sgd_train: parameters left B");
            ++step;
        }
    }

    res.w_avg.resize(K);
    for (std::size_t k = 0; k < K; ++k) res.w_avg[k] = w_sum[k] / static_cast<double>(T);
    res.w_final = ens.w;
    res.thetas = ens.thetas;
    res.theta0 = ens.theta0;
    return res;
}

int sign_label(double f) { return f >= 0.0 ? 1 : -1; }

int classify(const CnnConfig& cfg, const std::vector<double>& w_avg, const std::vector<CnnParams>& thetas,
             const ImageGrid& x) {
    EnsembleParams ens{w_avg, thetas, {}};
    return sign_label(ensemble_eval(cfg, ens, x));
}

CnnParams zero_network(const CnnConfig& cfg, const CnnParams& like) {
    like.check_shape(cfg);
    const CnnLayout lay(cfg);
    CnnParams out = like;
    out.flat[lay.head_bias()] = 0.0;
    for (int i = 0; i < cfg.L2; ++i) out.flat[lay.head_out(i)] = 0.0;
    return out;
}

}  // namespace cnnsgd
