#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cnnsgd/bounds.hpp"
#include "cnnsgd/cnn.hpp"
#include "cnnsgd/hmax.hpp"
#include "cnnsgd/sgd.hpp"

namespace cnnsgd {

// Inputs to theorem2_architecture. The theory leaves the constants open, these are desk-scale defaults.
struct ArchitectureInputs {
    double p = 1.0;
    double c5 = 1.0;
    double c6 = 1.0;
    int c7 = 8;
    double c3 = 1.0;
};

struct SweepConfig {
    std::vector<int> n_values;
    int seeds = 10;
    int test_n = 2000;
    int mc_labels = 1;  // label draws per test image for the label-based regret
    int threads = 0;
};

struct ExperimentSpec {
    GeneratorConfig generator;
    std::optional<CnnConfig> cnn;  // fixed architecture; otherwise built from `arch` for each n
    ArchitectureInputs arch;
    TrainConfig train;
    int steps_per_sample = 10;  // t = steps_per_sample * n unless train.t is set
    SweepConfig sweep;
    double memory_cap_mb = 1024.0;
    std::string dataset_path;     // train: read instead of generating
    std::string checkpoint_path;  // evaluate: checkpoint to score
    std::string source_text;      // canonical JSON, used for the config hash

    static ExperimentSpec parse(const std::string& json_text);
    static ExperimentSpec load(const std::string& path);
    void validate() const;
    std::string canonical() const;
};

std::uint64_t fnv1a64(const std::string& bytes);

// Architecture for a given sample size, refusing configurations above the memory cap.
CnnConfig sweep_architecture(const ExperimentSpec& spec, int n);
// Bytes held by one training run: parameters, initial copy and gradient for every component.
double training_bytes(const CnnConfig& cfg, int K);

struct SweepRow {
    int n = 0;
    int seed = 0;
    double regret = 0.0;     // exact-eta excess risk on the common test set
    double mc_regret = 0.0;  // label-sampling estimate
    double train_loss = 0.0; // mean loss over the last pass
    double wallclock = 0.0;  // seconds
};

struct SweepSummary {
    std::vector<int> n_values;
    std::vector<double> median_regret;
    std::vector<double> mean_regret;
    double slope = 0.0;  // least squares of log median regret on log n
};

struct SweepResult {
    std::vector<SweepRow> rows;  // sorted by (n, seed)
    SweepSummary summary;
    std::string rows_csv() const;     // deterministic
    std::string summary_csv() const;  // deterministic
    std::string timing_csv() const;   // wallclock only
};

SweepResult run_rate_sweep(const ExperimentSpec& spec, std::uint64_t seed);
double loglog_slope(const std::vector<int>& n, const std::vector<double>& values);
double median(std::vector<double> v);

// Bound reports for the configured architecture, with empirical values on random instances.
std::vector<BoundReport> run_bounds(const ExperimentSpec& spec, std::uint64_t seed);

struct Manifest {
    std::string command;
    std::uint64_t config_hash = 0;
    std::uint64_t seed = 0;
    std::string version;
    std::vector<std::string> outputs;
    std::string text() const;
};

std::string library_version();
std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace cnnsgd
