#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>

#include "cnnsgd/harness.hpp"

using namespace cnnsgd;

namespace {

constexpr const char* kTiny = R"json({
  "generator": {"d1": 3, "d2": 3, "model": "smoothmax(4)", "seed": 2},
  "cnn": {"L1": 1, "channels": [2], "filter_sizes": [2], "L2": 1, "beta": 2},
  "train": {"K": 3, "steps_per_sample": 2, "lambda": 0.1},
  "sweep": {"n": [8, 16], "seeds": 3, "test_n": 50, "threads": 2}
})json";

}  // namespace

TEST(Spec, ParseReadsNestedFields) {
    const ExperimentSpec s = ExperimentSpec::parse(kTiny);
    EXPECT_EQ(s.generator.d1, 3);
    EXPECT_EQ(s.generator.model.descriptor(), "smoothmax(4)");
    ASSERT_TRUE(s.cnn.has_value());
    EXPECT_EQ(s.cnn->channels, std::vector<int>{2});
    EXPECT_EQ(s.train.K, 3);
    EXPECT_EQ(*s.train.lambda, 0.1);
    EXPECT_EQ(s.steps_per_sample, 2);
    EXPECT_EQ(s.sweep.n_values, (std::vector<int>{8, 16}));
}

TEST(Spec, RejectsBadInput) {
    EXPECT_THROW(ExperimentSpec::parse("{not json"), ConfigError);
    EXPECT_THROW(ExperimentSpec::parse(R"({"sweep": {"n": [100, 50]}})"), ConfigError);
    EXPECT_THROW(ExperimentSpec::parse(R"({"sweep": {"n": [10, 10]}})"), ConfigError);
    EXPECT_THROW(ExperimentSpec::parse(R"({"sweep": {"seeds": 0}})"), ConfigError);
    EXPECT_THROW(ExperimentSpec::parse(R"({"train": {"K": "three"}})"), ConfigError);
    EXPECT_THROW(ExperimentSpec::parse(R"({"generator": {"model": "wobble"}})"), ConfigError);
    EXPECT_THROW(ExperimentSpec::parse(R"({"generator": {"d1": 1, "d2": 1}})"), ConfigError);
    EXPECT_THROW(ExperimentSpec::parse(R"({"paths": {"dataset": "/nonexistent/data.csv"}})"), ConfigError);
}

TEST(Spec, HashFollowsCanonicalText) {
    EXPECT_EQ(fnv1a64(""), 0xcbf29ce484222325ULL);
    EXPECT_EQ(fnv1a64("a"), 0xaf63dc4c8601ec8cULL);
    const ExperimentSpec a = ExperimentSpec::parse(R"({"train": {"K": 4}, "memory_cap_mb": 10})");
    const ExperimentSpec b = ExperimentSpec::parse(R"({ "memory_cap_mb": 10,  "train": {"K": 4} })");
    EXPECT_EQ(fnv1a64(a.canonical()), fnv1a64(b.canonical()));
}

TEST(Summary, MedianAndSlope) {
    EXPECT_EQ(median({3.0, 1.0, 2.0}), 2.0);
    EXPECT_EQ(median({4.0, 1.0, 2.0, 3.0}), 2.5);
    EXPECT_THROW(median({}), ConfigError);
    const std::vector<int> n{100, 200, 400, 800};
    std::vector<double> v;
    for (int k : n) v.push_back(3.0 / std::sqrt(static_cast<double>(k)));
    EXPECT_NEAR(loglog_slope(n, v), -0.5, 1e-12);
    EXPECT_NEAR(loglog_slope({10, 20}, {0.0, 0.0}), 0.0, 1e-12);
    EXPECT_THROW(loglog_slope({10}, {1.0}), ConfigError);
}

TEST(Sweep, MemoryCapRefusesWithSizes) {
    ExperimentSpec s = ExperimentSpec::parse(kTiny);
    s.memory_cap_mb = 1e-6;
    try {
        sweep_architecture(s, 8);
        FAIL() << "expected a refusal";
    } catch (const ConfigError& e) {
        EXPECT_NE(std::string(e.what()).find("parameters per network"), std::string::npos);
    }
    s.memory_cap_mb = 1.0;
    EXPECT_NO_THROW(sweep_architecture(s, 8));
    EXPECT_DOUBLE_EQ(training_bytes(*s.cnn, 2), 3.0 * 8.0 * CnnLayout(*s.cnn).size() * 2);
}

TEST(Sweep, TinySweepIsDeterministicAcrossThreadCounts) {
    ExperimentSpec s = ExperimentSpec::parse(kTiny);
    const SweepResult a = run_rate_sweep(s, 2);
    s.sweep.threads = 1;
    const SweepResult b = run_rate_sweep(s, 2);
    EXPECT_EQ(a.rows_csv(), b.rows_csv());
    EXPECT_EQ(a.summary_csv(), b.summary_csv());
    ASSERT_EQ(a.rows.size(), 6u);
    EXPECT_EQ(a.rows.front().n, 8);
    EXPECT_EQ(a.rows.back().n, 16);
    for (const auto& r : a.rows) {
        EXPECT_GE(r.regret, 0.0);
        EXPECT_GT(r.train_loss, 0.0);
    }
    EXPECT_NE(run_rate_sweep(s, 3).rows_csv(), a.rows_csv());
}

TEST(Sweep, HalfEtaModelHasNoRegret) {
    ExperimentSpec s = ExperimentSpec::parse(kTiny);
    s.generator.model = HierarchicalModel::uniform(1, Node::constant(0.5));
    for (const auto& r : run_rate_sweep(s, 5).rows) EXPECT_EQ(r.regret, 0.0);
}

TEST(Sweep, CertainLabelsAreLearned) {
    ExperimentSpec s = ExperimentSpec::parse(kTiny);
    s.generator.model = HierarchicalModel::uniform(1, Node::constant(1.0));
    for (const auto& r : run_rate_sweep(s, 6).rows) {
        EXPECT_EQ(r.regret, 0.0);
        EXPECT_EQ(r.mc_regret, 0.0);
    }
}

TEST(Bounds, ReportsDominate) {
    const ExperimentSpec s = ExperimentSpec::parse(kTiny);
    const auto reports = run_bounds(s, 4);
    ASSERT_EQ(reports.size(), 2u);
    EXPECT_EQ(reports[0].name, "lipschitz");
    for (const auto& r : reports) EXPECT_TRUE(r.dominates()) << r.name;
}

TEST(Files, TextRoundTripAndManifest) {
    const auto path = (std::filesystem::temp_directory_path() / "cnnsgd_harness_test.txt").string();
    write_text_file(path, "a,b\n1,2\n");
    EXPECT_EQ(read_text_file(path), "a,b\n1,2\n");
    std::filesystem::remove(path);
    EXPECT_THROW(read_text_file(path), ConfigError);
    const Manifest m{"train", 0xabcULL, 7, library_version(), {"checkpoint.json"}};
    EXPECT_EQ(m.text(), "command=train\nconfig_hash=0000000000000abc\nseed=7\nversion=" + library_version() +
                            "\noutput=checkpoint.json\n");
}
