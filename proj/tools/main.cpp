#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "cnnsgd/harness.hpp"
#include "cnnsgd/verify.hpp"

using namespace cnnsgd;
namespace fs = std::filesystem;

namespace {

struct Options {
    std::string config;
    std::string out = ".";
    std::optional<std::uint64_t> seed;
    std::string suite;
};

ExperimentSpec load_spec(const Options& o) {
    if (o.config.empty()) return ExperimentSpec::parse("{}");
    return ExperimentSpec::load(o.config);
}

std::uint64_t run_seed(const Options& o, const ExperimentSpec& spec) { return o.seed ? *o.seed : spec.generator.seed; }

void finish(const Options& o, const std::string& command, const ExperimentSpec& spec, std::uint64_t seed,
            std::vector<std::string> outputs) {
    Manifest m{command, fnv1a64(spec.canonical()), seed, library_version(), std::move(outputs)};
    write_text_file((fs::path(o.out) / "manifest.txt").string(), m.text());
}

void architecture_notice(const ExperimentSpec& spec) {
    if (!spec.cnn)
        std::cerr << "notice: the theory leaves the architecture constants unspecified; using c5 = " << spec.arch.c5
                  << ", c6 = " << spec.arch.c6 << ", c7 = " << spec.arch.c7 << "\n";
}

int cmd_generate(const Options& o) {
    ExperimentSpec spec = load_spec(o);
    spec.generator.seed = run_seed(o, spec);
    const auto data = sample_dataset(spec.generator);
    const std::string path = (fs::path(o.out) / "dataset.csv").string();
    write_text_file(path, write_dataset(spec.generator, data));
    finish(o, "generate", spec, spec.generator.seed, {"dataset.csv"});
    std::cout << "wrote " << data.size() << " samples to " << path << "\n";
    return 0;
}

int cmd_train(const Options& o) {
    ExperimentSpec spec = load_spec(o);
    const std::uint64_t seed = run_seed(o, spec);
    std::vector<LabeledSample> data;
    if (!spec.dataset_path.empty()) {
        data = read_dataset(read_text_file(spec.dataset_path), &spec.generator);
    } else {
        spec.generator.seed = seed;
        data = sample_dataset(spec.generator);
    }
    const int n = static_cast<int>(data.size());
    architecture_notice(spec);
    const CnnConfig cfg = sweep_architecture(spec, n);
    TrainConfig tc = spec.train;
    if (tc.t == 0) tc.t = static_cast<long long>(spec.steps_per_sample) * n;
    tc.seed = substream_seed(seed, 2000000);
    Rng rng(tc.seed);
    const TrainResult tr = sgd_train(data, cfg, tc, rng);
    Checkpoint ck{cfg, tc, tr.w_avg, tr.thetas, tr.theta0, rng_state(rng)};
    write_text_file((fs::path(o.out) / "checkpoint.json").string(), write_checkpoint(ck));
    std::string loss = "step,loss\n";
    for (std::size_t i = 0; i < tr.trace.loss.size(); ++i) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%zu,%.17g\n", i, tr.trace.loss[i]);
        loss += buf;
    }
    write_text_file((fs::path(o.out) / "train_loss.csv").string(), loss);
    finish(o, "train", spec, seed, {"checkpoint.json", "train_loss.csv"});
    std::cout << "trained K = " << tc.K << " networks for " << tc.t << " steps\n";
    return 0;
}

int cmd_evaluate(const Options& o) {
    ExperimentSpec spec = load_spec(o);
    const std::uint64_t seed = run_seed(o, spec);
    if (spec.checkpoint_path.empty()) throw ConfigError("evaluate needs paths.checkpoint in the config");
    const Checkpoint ck = read_checkpoint(read_text_file(spec.checkpoint_path));
    CnnConfig cfg = ck.config;
    if (ck.train.beta) cfg.beta = *ck.train.beta;
    GeneratorConfig g = spec.generator;
    g.n = spec.sweep.test_n;
    g.seed = substream_seed(seed, 1000000);
    const auto test_x = sample_images(g);
    const Classifier clf = [&](const ImageGrid& x) { return classify(cfg, ck.w_avg, ck.thetas, x); };
    const RegretEstimate r = empirical_regret(clf, spec.generator.model, test_x, spec.sweep.mc_labels,
                                              substream_seed(seed, 3000000));
    char buf[128];
    std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g\n", g.n, r.exact, r.mc);
    write_text_file((fs::path(o.out) / "evaluate.csv").string(), std::string("test_n,empirical_regret,mc_regret\n") + buf);
    finish(o, "evaluate", spec, seed, {"evaluate.csv"});
    std::cout << "regret " << r.exact << " (label estimate " << r.mc << ")\n";
    return 0;
}

int cmd_sweep(const Options& o) {
    const ExperimentSpec spec = load_spec(o);
    const std::uint64_t seed = run_seed(o, spec);
    architecture_notice(spec);
    const SweepResult res = run_rate_sweep(spec, seed);
    write_text_file((fs::path(o.out) / "sweep_rows.csv").string(), res.rows_csv());
    write_text_file((fs::path(o.out) / "sweep_summary.csv").string(), res.summary_csv());
    write_text_file((fs::path(o.out) / "sweep_timing.csv").string(), res.timing_csv());
    finish(o, "rate-sweep", spec, seed, {"sweep_rows.csv", "sweep_summary.csv", "sweep_timing.csv"});
    std::cout << res.summary_csv();
    return 0;
}

int cmd_verify(const Options& o) {
    VerifyOptions vo;
    ExperimentSpec spec = load_spec(o);
    if (o.seed) vo.seed = *o.seed;
    vo.threads = spec.sweep.threads;
    const VerifyReport rep = run_verify(o.suite, vo);
    const std::string name = "verify_" + o.suite + ".csv";
    write_text_file((fs::path(o.out) / name).string(), rep.csv());
    finish(o, "verify " + o.suite, spec, vo.seed, {name});
    std::cout << rep.summary() << "\n";
    return rep.passed() ? 0 : 1;
}

int cmd_bounds(const Options& o) {
    const ExperimentSpec spec = load_spec(o);
    const std::uint64_t seed = run_seed(o, spec);
    architecture_notice(spec);
    std::string csv = BoundReport::csv_header() + "\n";
    bool ok = true;
    for (const auto& r : run_bounds(spec, seed)) {
        csv += r.csv_row() + "\n";
        ok = ok && r.dominates();
    }
    write_text_file((fs::path(o.out) / "bounds.csv").string(), csv);
    finish(o, "bounds", spec, seed, {"bounds.csv"});
    std::cout << csv;
    return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Ensembles of convolutional networks trained by projected SGD, with synthetic experiments"};
    app.require_subcommand(1);
    Options o;
    auto common = [&](CLI::App* sub) {
        sub->add_option("--config", o.config, "experiment config (JSON)")->check(CLI::ExistingFile);
        sub->add_option("--out", o.out, "output directory");
        sub->add_option("--seed", o.seed, "override the config seed");
    };
    auto* gen = app.add_subcommand("generate", "sample a synthetic dataset");
    auto* train = app.add_subcommand("train", "train an ensemble and write a checkpoint");
    auto* eval = app.add_subcommand("evaluate", "score a checkpoint on fresh test data");
    auto* sweep = app.add_subcommand("rate-sweep", "regret against sample size");
    auto* verify = app.add_subcommand("verify", "run an invariant suite");
    auto* bounds = app.add_subcommand("bounds", "bound audit for the configured architecture");
    for (auto* s : {gen, train, eval, sweep, verify, bounds}) common(s);
    verify->add_option("suite", o.suite, "suite name")->required()->check(CLI::IsMember(verify_suites()));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }
    try {
        fs::create_directories(o.out);
        if (*gen) return cmd_generate(o);
        if (*train) return cmd_train(o);
        if (*eval) return cmd_evaluate(o);
        if (*sweep) return cmd_sweep(o);
        if (*verify) return cmd_verify(o);
        if (*bounds) return cmd_bounds(o);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
