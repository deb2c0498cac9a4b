#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "cnnsgd/cnn.hpp"
#include "cnnsgd/sgd.hpp"

namespace cnnsgd {

using Quad = std::array<double, 4>;

enum class NodeKind { Mean, SmoothMax, Product, Bump, Constant };

// One 4-ary node function, extended to all of R^4 with values in [0,1].
struct Node {
    NodeKind kind = NodeKind::Mean;
    double gamma = 8.0;   // smooth-max sharpness
    double lambda = 1.0;  // bump sharpness
    Quad center{0.5, 0.5, 0.5, 0.5};
    double value = 0.5;   // constant node
    // optional additive disturbance eps*sin(freq*(z1+2z2+3z3+4z4)+phase), bounded by eps
    double perturb_eps = 0.0;
    double perturb_freq = 1.0;
    double perturb_phase = 0.0;

    static Node mean();
    static Node smooth_max(double gamma);
    static Node product();
    static Node bump(double lambda, Quad center);
    static Node constant(double c);

    double eval(const Quad& z) const;
    // Euclidean Lipschitz constant of the unperturbed node on R^4
    double lipschitz() const;
    double smoothness() const { return 1.0; }  // every library node is (1, C)-smooth
    std::string descriptor() const;  // base node, then an optional +wave(eps;freq;phase)
    std::string base_descriptor() const;
    static Node parse(const std::string& token);
};

struct HierarchicalModel {
    int level = 1;
    std::vector<std::vector<Node>> nodes;  // nodes[k-1][s-1], k = 1..level, 4^(level-k) per level

    static HierarchicalModel uniform(int level, const Node& g);
    void validate() const;
    int side() const { return 1 << level; }
    double lipschitz() const;  // max over nodes
    std::string descriptor() const;
    static HierarchicalModel parse(const std::string& desc);
};

// Recursive quadrant evaluation: child c of node (k, s) is node (k-1, 4(s-1)+c) with
// c = 1 top-left, 2 = first rows / second columns, 3 = second rows / first columns, 4 = bottom-right.
template <class NodeFn, class PixelFn>
double eval_hierarchy_generic(int level, NodeFn&& node, PixelFn&& pixel, int i0, int j0) {
    struct Rec {
        NodeFn& node;
        PixelFn& pixel;
        double run(int k, int s, int i, int j) {
            if (k == 0) return pixel(i, j);
            const int h = 1 << (k - 1);
            const Quad z{run(k - 1, 4 * (s - 1) + 1, i, j), run(k - 1, 4 * (s - 1) + 2, i, j + h),
                         run(k - 1, 4 * (s - 1) + 3, i + h, j), run(k - 1, 4 * (s - 1) + 4, i + h, j + h)};
            return node(k, s, z);
        }
    };
    Rec rec{node, pixel};
    return rec.run(level, 1, i0, j0);
}

double eval_hierarchy(const HierarchicalModel& model, const ImageGrid& patch);
double eval_hierarchy_at(const HierarchicalModel& model, const ImageGrid& x, int i0, int j0);
double eval_maxpool_model(const HierarchicalModel& model, const ImageGrid& x);

enum class PixelLawKind { IidUniform, BlockwiseSmooth };

struct PixelLaw {
    PixelLawKind kind = PixelLawKind::IidUniform;
    int coarse = 3;  // coarse grid side for the blockwise-smooth law

    std::string descriptor() const;
    static PixelLaw parse(const std::string& s);
};

struct GeneratorConfig {
    int d1 = 4;
    int d2 = 4;
    HierarchicalModel model;
    PixelLaw law;
    int n = 100;
    std::uint64_t seed = 0;
};

std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t index);
ImageGrid sample_image(int d1, int d2, const PixelLaw& law, Rng& rng);
std::vector<LabeledSample> sample_dataset(const GeneratorConfig& gen);
std::vector<ImageGrid> sample_images(const GeneratorConfig& gen);

int bayes_decide(const HierarchicalModel& model, const ImageGrid& x);
int bayes_decide_eta(double eta);

using Classifier = std::function<int(const ImageGrid&)>;

struct RegretEstimate {
    double exact = 0.0;  // (1/m) sum |2 eta - 1| 1{C(x) != bayes(x)}
    double mc = 0.0;     // label-sampling estimate of the same excess risk
};

RegretEstimate empirical_regret(const Classifier& classifier, const HierarchicalModel& model,
                                const std::vector<ImageGrid>& test_x, int mc_labels, std::uint64_t seed);

double margin_condition_mc(const HierarchicalModel& model, const GeneratorConfig& gen, double n, int trials);

struct SurrogateGap {
    double lhs = 0.0;          // exact excess misclassification of sign(f)
    double excess_risk = 0.0;  // exact excess logistic risk
    double rhs = 0.0;          // sqrt(2) * sqrt(excess_risk)
    double rhs_stated = 0.0;   // (1/sqrt(2)) * sqrt(excess_risk)
};

constexpr double kLogitClamp = 50.0;
double clamped_logit(double eta);

SurrogateGap surrogate_gap_check(const std::function<double(const ImageGrid&)>& f, const HierarchicalModel& model,
                                 const std::vector<ImageGrid>& test_x);

std::string write_dataset(const GeneratorConfig& gen, const std::vector<LabeledSample>& data);
std::vector<LabeledSample> read_dataset(const std::string& text, GeneratorConfig* header = nullptr);

}  // namespace cnnsgd
