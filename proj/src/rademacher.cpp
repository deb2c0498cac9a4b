#include <algorithm>
#include <cmath>

#include "cnnsgd/bounds.hpp"
#include "cnnsgd/hmax.hpp"
#include "cnnsgd/parallel.hpp"

namespace cnnsgd {

namespace {

double correlation(const CnnConfig& cfg, const CnnParams& th, const std::vector<ImageGrid>& images,
                   const std::vector<int>& eps, double beta) {
    double s = 0.0;
    for (std::size_t i = 0; i < images.size(); ++i) s += eps[i] * truncate(beta, cnn_value(cfg, th, images[i]));
    return std::abs(s) / static_cast<double>(images.size());
}

double one_trial(const CnnConfig& cfg, const std::vector<ImageGrid>& images, const RademacherConfig& rc,
                 std::uint64_t trial) {
    Rng rng(substream_seed(rc.seed, trial));
    std::vector<int> eps(images.size());
    std::bernoulli_distribution coin(0.5);
    for (auto& e : eps) e = coin(rng) ? 1 : -1;
    if (rc.beta == 0.0) return 0.0;

    const std::size_t P = CnnLayout(cfg).size();
    std::uniform_real_distribution<double> box(-rc.B, rc.B);
    std::uniform_int_distribution<std::size_t> coord(0, P - 1);
    std::uniform_int_distribution<int> move(0, 2);
    std::normal_distribution<double> step(0.0, 0.3 * std::max(rc.B, 1e-12));
    double best = 0.0;
    for (int r = 0; r < rc.restarts; ++r) {
        CnnParams th = CnnParams::zeros(cfg);
        for (auto& v : th.flat) v = box(rng);
        double cur = correlation(cfg, th, images, eps, rc.beta);
        for (int s = 0; s < rc.climb_steps; ++s) {
            const std::size_t c = coord(rng);
            const double old = th.flat[c];
            const int m = move(rng);
            const double proposal = m == 0 ? rc.B : m == 1 ? -rc.B : std::clamp(old + step(rng), -rc.B, rc.B);
            th.flat[c] = proposal;
            const double val = correlation(cfg, th, images, eps, rc.beta);
            if (val > cur)
                cur = val;
            else
                th.flat[c] = old;
        }
        best = std::max(best, cur);
    }
    return best;
}

}  // namespace

RademacherEstimate rademacher_mc(const CnnConfig& cfg, const std::vector<ImageGrid>& images,
                                 const RademacherConfig& rc) {
    if (rc.trials < 1) throw ConfigError("rademacher estimate needs trials >= 1");
    if (images.empty()) throw ConfigError("rademacher estimate needs images");
    cfg.validate();
    RademacherEstimate est;
    est.per_trial.assign(rc.trials, 0.0);
    parallel_for(static_cast<std::size_t>(rc.trials), rc.threads, [&](std::size_t t) {
        est.per_trial[t] = one_trial(cfg, images, rc, static_cast<std::uint64_t>(t));
    });
    double s = 0.0;
    for (double v : est.per_trial) s += v;
    est.mean = s / rc.trials;
    return est;
}

}  // namespace cnnsgd
