#include "cnnsgd/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "cnnsgd/grad.hpp"
#include "cnnsgd/parallel.hpp"

namespace cnnsgd {

namespace {

using nlohmann::json;

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

template <class T>
void get_if(const json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

CnnConfig parse_cnn(const json& j) {
    CnnConfig c;
    c.L1 = j.at("L1").get<int>();
    c.channels = j.at("channels").get<std::vector<int>>();
    c.filter_sizes = j.at("filter_sizes").get<std::vector<int>>();
    get_if(j, "L2", c.L2);
    get_if(j, "beta", c.beta);
    c.validate();
    return c;
}

// stream tags keep the random streams of the sweep apart
constexpr std::uint64_t kTestStream = 1000000;
constexpr std::uint64_t kTrainStream = 2000000;
constexpr std::uint64_t kLabelStream = 3000000;

}  // namespace

std::uint64_t fnv1a64(const std::string& bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string library_version() { return CNNSGD_VERSION; }

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open " + path);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + path);
    out << text;
}

ExperimentSpec ExperimentSpec::parse(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    ExperimentSpec s;
    try {
        if (j.contains("generator")) {
            const json& g = j.at("generator");
            get_if(g, "d1", s.generator.d1);
            get_if(g, "d2", s.generator.d2);
            get_if(g, "n", s.generator.n);
            get_if(g, "seed", s.generator.seed);
            s.generator.model = HierarchicalModel::parse(g.value("model", std::string("mean")));
            s.generator.law = PixelLaw::parse(g.value("law", std::string("iid-uniform")));
        } else {
            s.generator.model = HierarchicalModel::uniform(1, Node::mean());
        }
        if (j.contains("cnn")) s.cnn = parse_cnn(j.at("cnn"));
        if (j.contains("architecture")) {
            const json& a = j.at("architecture");
            get_if(a, "p", s.arch.p);
            get_if(a, "c5", s.arch.c5);
            get_if(a, "c6", s.arch.c6);
            get_if(a, "c7", s.arch.c7);
            get_if(a, "c3", s.arch.c3);
        }
        if (j.contains("train")) {
            const json& t = j.at("train");
            get_if(t, "K", s.train.K);
            get_if(t, "N", s.train.N);
            get_if(t, "I", s.train.I);
            get_if(t, "t", s.train.t);
            get_if(t, "alpha", s.train.alpha);
            get_if(t, "B", s.train.B);
            get_if(t, "seed", s.train.seed);
            get_if(t, "steps_per_sample", s.steps_per_sample);
            if (t.contains("lambda")) s.train.lambda = t.at("lambda").get<double>();
            if (t.contains("beta")) s.train.beta = t.at("beta").get<double>();
        }
        if (j.contains("sweep")) {
            const json& w = j.at("sweep");
            get_if(w, "n", s.sweep.n_values);
            get_if(w, "seeds", s.sweep.seeds);
            get_if(w, "test_n", s.sweep.test_n);
            get_if(w, "mc_labels", s.sweep.mc_labels);
            get_if(w, "threads", s.sweep.threads);
        }
        get_if(j, "memory_cap_mb", s.memory_cap_mb);
        if (j.contains("paths")) {
            get_if(j.at("paths"), "dataset", s.dataset_path);
            get_if(j.at("paths"), "checkpoint", s.checkpoint_path);
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("bad config field: ") + e.what());
    }
    s.source_text = j.dump();
    s.validate();
    return s;
}

ExperimentSpec ExperimentSpec::load(const std::string& path) { return parse(read_text_file(path)); }

void ExperimentSpec::validate() const {
    generator.model.validate();
    if (generator.d1 < generator.model.side() || generator.d2 < generator.model.side())
        throw ConfigError("images are smaller than the hierarchy window");
    if (steps_per_sample < 1) throw ConfigError("steps_per_sample must be positive");
    for (std::size_t i = 1; i < sweep.n_values.size(); ++i)
        if (sweep.n_values[i] <= sweep.n_values[i - 1]) throw ConfigError("sweep n values must be strictly increasing");
    for (int n : sweep.n_values)
        if (n < 1) throw ConfigError("sweep n values must be positive");
    if (sweep.seeds < 1) throw ConfigError("sweep needs at least one seed");
    if (sweep.test_n < 1) throw ConfigError("sweep needs a test set");
    if (sweep.mc_labels < 0) throw ConfigError("mc_labels must be nonnegative");
    if (!dataset_path.empty()) {
        std::ifstream f(dataset_path);
        if (!f) throw ConfigError("dataset file does not exist: " + dataset_path);
    }
    if (!checkpoint_path.empty()) {
        std::ifstream f(checkpoint_path);
        if (!f) throw ConfigError("checkpoint file does not exist: " + checkpoint_path);
    }
}

std::string ExperimentSpec::canonical() const { return source_text; }

double training_bytes(const CnnConfig& cfg, int K) {
    return 3.0 * 8.0 * static_cast<double>(CnnLayout(cfg).size()) * K;
}

CnnConfig sweep_architecture(const ExperimentSpec& spec, int n) {
    CnnConfig cfg;
    if (spec.cnn) {
        cfg = *spec.cnn;
    } else {
        cfg = theorem2_architecture(n, spec.arch.p, spec.generator.model.level, spec.arch.c5, spec.arch.c6,
                                    spec.arch.c7, spec.arch.c3)
                  .config;
    }
    const double bytes = training_bytes(cfg, spec.train.K);
    if (bytes > spec.memory_cap_mb * 1024.0 * 1024.0) {
        std::ostringstream os;
        os << "architecture for n = " << n << " needs " << bytes / (1024.0 * 1024.0) << " MB (L1 = " << cfg.L1
           << ", channels = " << cfg.max_channels() << ", max filter = " << cfg.max_filter() << ", L2 = " << cfg.L2
           << ", K = " << spec.train.K << ", parameters per network = " << CnnLayout(cfg).size()
           << "), above the cap of " << spec.memory_cap_mb << " MB";
        throw ConfigError(os.str());
    }
    return cfg;
}

double median(std::vector<double> v) {
    if (v.empty()) throw ConfigError("median of an empty list");
    std::sort(v.begin(), v.end());
    const std::size_t m = v.size() / 2;
    return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

double loglog_slope(const std::vector<int>& n, const std::vector<double>& values) {
    if (n.size() != values.size() || n.size() < 2) throw ConfigError("slope needs at least two points");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double m = static_cast<double>(n.size());
    for (std::size_t i = 0; i < n.size(); ++i) {
        const double x = std::log(static_cast<double>(n[i]));
        const double y = std::log(std::max(values[i], 1e-12));
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    return (m * sxy - sx * sy) / (m * sxx - sx * sx);
}

SweepResult run_rate_sweep(const ExperimentSpec& spec, std::uint64_t seed) {
    if (spec.sweep.n_values.empty()) throw ConfigError("rate sweep needs a list of n values");
    spec.validate();
    const auto& ns = spec.sweep.n_values;
    std::vector<CnnConfig> archs;
    for (int n : ns) archs.push_back(sweep_architecture(spec, n));

    GeneratorConfig test_gen = spec.generator;
    test_gen.n = spec.sweep.test_n;
    test_gen.seed = substream_seed(seed, kTestStream);
    const std::vector<ImageGrid> test_x = sample_images(test_gen);

    // the longest dataset per seed; smaller n use its prefix, so datasets are nested in n
    const int S = spec.sweep.seeds;
    std::vector<std::vector<LabeledSample>> data(S);
    for (int s = 0; s < S; ++s) {
        GeneratorConfig g = spec.generator;
        g.n = ns.back();
        g.seed = substream_seed(seed, static_cast<std::uint64_t>(s));
        data[s] = sample_dataset(g);
    }

    const std::size_t cells = ns.size() * static_cast<std::size_t>(S);
    SweepResult res;
    res.rows.resize(cells);
    parallel_for(cells, spec.sweep.threads, [&](std::size_t c) {
        const std::size_t ni = c / S;
        const int s = static_cast<int>(c % S);
        const int n = ns[ni];
        const auto start = std::chrono::steady_clock::now();
        const std::vector<LabeledSample> train_data(data[s].begin(), data[s].begin() + n);
        TrainConfig tc = spec.train;
        if (tc.t == 0) tc.t = static_cast<long long>(spec.steps_per_sample) * n;
        tc.seed = substream_seed(substream_seed(seed, kTrainStream + s), static_cast<std::uint64_t>(n));
        Rng rng(tc.seed);
        const CnnConfig& cfg = archs[ni];
        const TrainResult tr = sgd_train(train_data, cfg, tc, rng);
        CnnConfig eval_cfg = cfg;
        if (tc.beta) eval_cfg.beta = *tc.beta;
        const Classifier clf = [&](const ImageGrid& x) { return classify(eval_cfg, tr.w_avg, tr.thetas, x); };
        const RegretEstimate r = empirical_regret(clf, spec.generator.model, test_x, spec.sweep.mc_labels,
                                                  substream_seed(seed, kLabelStream + c));
        SweepRow& row = res.rows[c];
        row.n = n;
        row.seed = s;
        row.regret = r.exact;
        row.mc_regret = r.mc;
        double last = 0.0;
        for (std::size_t i = tr.trace.loss.size() - n; i < tr.trace.loss.size(); ++i) last += tr.trace.loss[i];
        row.train_loss = last / n;
        row.wallclock = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    });

    SweepSummary& sum = res.summary;
    sum.n_values = ns;
    for (std::size_t ni = 0; ni < ns.size(); ++ni) {
        std::vector<double> r;
        for (int s = 0; s < S; ++s) r.push_back(res.rows[ni * S + s].regret);
        sum.median_regret.push_back(median(r));
        double m = 0.0;
        for (double v : r) m += v;
        sum.mean_regret.push_back(m / S);
    }
    sum.slope = ns.size() >= 2 ? loglog_slope(ns, sum.median_regret) : 0.0;
    return res;
}

std::string SweepResult::rows_csv() const {
    std::string out = "n,seed,empirical_regret,mc_regret,train_loss\n";
    for (const auto& r : rows)
        out += std::to_string(r.n) + "," + std::to_string(r.seed) + "," + num(r.regret) + "," + num(r.mc_regret) + "," +
               num(r.train_loss) + "\n";
    return out;
}

std::string SweepResult::summary_csv() const {
    std::string out = "n,median_regret,mean_regret\n";
    for (std::size_t i = 0; i < summary.n_values.size(); ++i)
        out += std::to_string(summary.n_values[i]) + "," + num(summary.median_regret[i]) + "," +
               num(summary.mean_regret[i]) + "\n";
    out += "slope," + num(summary.slope) + ",\n";
    return out;
}

std::string SweepResult::timing_csv() const {
    std::string out = "n,seed,wallclock\n";
    char buf[40];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof buf, "%.3f", r.wallclock);
        out += std::to_string(r.n) + "," + std::to_string(r.seed) + "," + buf + "\n";
    }
    return out;
}

std::vector<BoundReport> run_bounds(const ExperimentSpec& spec, std::uint64_t seed) {
    const CnnConfig cfg = sweep_architecture(spec, spec.generator.n);
    const double B = spec.train.B;
    Rng rng(substream_seed(seed, 0));
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    GeneratorConfig g = spec.generator;
    g.n = 32;
    g.seed = substream_seed(seed, 1);
    const std::vector<ImageGrid> images = sample_images(g);
    auto random_theta = [&] {
        CnnParams p = CnnParams::zeros(cfg);
        for (auto& v : p.flat) v = B * unif(rng);
        return p;
    };

    std::vector<BoundReport> out;
    const CnnParams a = random_theta();
    CnnParams b = a;
    for (auto& v : b.flat) v = std::clamp(v + 0.1 * unif(rng), -B, B);
    const double lip = lipschitz_bound(cfg, B);
    out.push_back({"lipschitz", std::isfinite(lip) ? lip : lipschitz_bound_log(cfg, B),
                   std::isfinite(lip) ? std::optional<double>(empirical_lipschitz(cfg, a, b, images)) : std::nullopt});
    if (!std::isfinite(lip)) out.back().name = "lipschitz_log";

    EnsembleParams ens;
    for (int k = 0; k < std::min(spec.train.K, 4); ++k) {
        ens.thetas.push_back(random_theta());
        ens.w.push_back(1.0 / std::min(spec.train.K, 4));
    }
    ens.w = project_A(ens.w, spec.train.alpha);
    ens.theta0 = ens.thetas;
    double gsup = 0.0;
    for (const auto& x : images) {
        const GradBundle gr = grad_ensemble(cfg, ens, x, 1);
        for (double v : gr.d_theta) gsup = std::max(gsup, std::abs(v));
    }
    const double gb = B >= 1.0 ? grad_sup_bound(cfg, B) : grad_sup_bound(cfg, 1.0);
    out.push_back({"gradient_sup", std::isfinite(gb) ? gb : grad_sup_bound_log(cfg, std::max(B, 1.0)),
                   std::isfinite(gb) ? std::optional<double>(gsup) : std::nullopt});
    if (!std::isfinite(gb)) out.back().name = "gradient_sup_log";
    if (cfg.L1 >= 2) out.push_back({"vc_structural", vc_structural_bound(cfg.L1, cfg.L2).value, std::nullopt});
    return out;
}

std::string Manifest::text() const {
    char hash[24];
    std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(config_hash));
    std::string out = "command=" + command + "\nconfig_hash=" + hash + "\nseed=" + std::to_string(seed) +
                      "\nversion=" + version + "\n";
    for (const auto& o : outputs) out += "output=" + o + "\n";
    return out;
}

}  // namespace cnnsgd
