#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace cnnsgd {

struct Check {
    std::string name;
    double measured = 0.0;
    double tolerance = 0.0;
    bool passed = false;
};

struct VerifyReport {
    std::string suite;
    std::vector<Check> checks;

    bool passed() const;
    int failures() const;
    void add(std::string name, double measured, double tolerance, bool passed);
    // add a "measured <= tolerance" check
    void add_le(std::string name, double measured, double tolerance);
    std::string csv() const;
    std::string summary() const;
};

struct VerifyOptions {
    std::uint64_t seed = 20240607;
    int threads = 0;  // 0 = hardware concurrency
};

// gadgets, gradients, projections, bounds, lemma1, taylor, embedding, rademacher
const std::vector<std::string>& verify_suites();
VerifyReport run_verify(const std::string& suite, const VerifyOptions& opt = {});

// Nearest point of {w >= 0, sum w <= 1, |w|^2 <= alpha} found by an exhaustive grid of the
// given step, followed by recentred local grids ten times finer at each level whose points are
// retracted onto the set. levels = 0 gives the plain grid optimum.
std::vector<double> grid_projection(const std::vector<double>& y, double alpha, double step, int levels);

}  // namespace cnnsgd
