#include "cnnsgd/hmax.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace cnnsgd {

namespace {

double clamp01(double v) { return std::min(1.0, std::max(0.0, v)); }

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::vector<double> parse_args(const std::string& token, std::string& name) {
    const auto open = token.find('(');
    name = token.substr(0, open);
    std::vector<double> args;
    if (open == std::string::npos) return args;
    const auto close = token.find(')', open);
    if (close == std::string::npos) throw ConfigError("malformed node token: " + token);
    std::stringstream ss(token.substr(open + 1, close - open - 1));
    std::string part;
    while (std::getline(ss, part, ';')) args.push_back(std::stod(part));
    return args;
}

}  // namespace

Node Node::mean() { return Node{}; }

Node Node::smooth_max(double gamma) {
    if (!(gamma > 0.0)) throw ConfigError("smooth-max needs gamma > 0");
    Node n;
    n.kind = NodeKind::SmoothMax;
    n.gamma = gamma;
    return n;
}

Node Node::product() {
    Node n;
    n.kind = NodeKind::Product;
    return n;
}

Node Node::bump(double lambda, Quad center) {
    if (!(lambda >= 0.0)) throw ConfigError("bump needs lambda >= 0");
    Node n;
    n.kind = NodeKind::Bump;
    n.lambda = lambda;
    n.center = center;
    return n;
}

Node Node::constant(double c) {
    if (!(c >= 0.0 && c <= 1.0)) throw ConfigError("constant node must lie in [0,1]");
    Node n;
    n.kind = NodeKind::Constant;
    n.value = c;
    return n;
}

double Node::eval(const Quad& z) const {
    double v = 0.0;
    switch (kind) {
        case NodeKind::Mean:
            v = clamp01((z[0] + z[1] + z[2] + z[3]) / 4.0);
            break;
        case NodeKind::SmoothMax: {
            // (1/gamma) log(mean exp(gamma z)) lies between mean(z) and max(z)
            const double m = *std::max_element(z.begin(), z.end());
            double s = 0.0;
            for (double zi : z) s += std::exp(gamma * (zi - m));
            v = clamp01(m + std::log(s / 4.0) / gamma);
            break;
        }
        case NodeKind::Product:
            v = clamp01(z[0]) * clamp01(z[1]) * clamp01(z[2]) * clamp01(z[3]);
            break;
        case NodeKind::Bump: {
            double r2 = 0.0;
            for (int i = 0; i < 4; ++i) r2 += (z[i] - center[i]) * (z[i] - center[i]);
            v = clamp01(1.0 - lambda * r2);
            break;
        }
        case NodeKind::Constant:
            v = value;
            break;
    }
    if (perturb_eps != 0.0)
        v = clamp01(v + perturb_eps * std::sin(perturb_freq * (z[0] + 2 * z[1] + 3 * z[2] + 4 * z[3]) + perturb_phase));
    return v;
}

double Node::lipschitz() const {
    switch (kind) {
        case NodeKind::Mean: return 0.5;          // |(1/4,1/4,1/4,1/4)|
        case NodeKind::SmoothMax: return 1.0;     // softmax weights have unit mass
        case NodeKind::Product: return 2.0;       // each partial is at most 1
        case NodeKind::Bump: return 2.0 * std::sqrt(lambda);
        case NodeKind::Constant: return 0.0;
    }
    return 0.0;
}

std::string Node::descriptor() const {
    std::string wave;
    if (perturb_eps != 0.0) wave = "+wave(" + fmt(perturb_eps) + ";" + fmt(perturb_freq) + ";" + fmt(perturb_phase) + ")";
    return base_descriptor() + wave;
}

std::string Node::base_descriptor() const {
    switch (kind) {
        case NodeKind::Mean: return "mean";
        case NodeKind::SmoothMax: return "smoothmax(" + fmt(gamma) + ")";
        case NodeKind::Product: return "product";
        case NodeKind::Bump:
            return "bump(" + fmt(lambda) + ";" + fmt(center[0]) + ";" + fmt(center[1]) + ";" + fmt(center[2]) + ";" +
                   fmt(center[3]) + ")";
        case NodeKind::Constant: return "const(" + fmt(value) + ")";
    }
    return "";
}

Node Node::parse(const std::string& token) {
    const auto plus = token.find("+wave(");
    if (plus != std::string::npos) {
        Node g = parse(token.substr(0, plus));
        std::string name;
        const auto w = parse_args(token.substr(plus + 1), name);
        if (w.size() != 3) throw ConfigError("wave needs eps;freq;phase: " + token);
        g.perturb_eps = w[0];
        g.perturb_freq = w[1];
        g.perturb_phase = w[2];
        return g;
    }
    std::string name;
    const auto args = parse_args(token, name);
    if (name == "mean") return mean();
    if (name == "product") return product();
    if (name == "smoothmax" && args.size() == 1) return smooth_max(args[0]);
    if (name == "const" && args.size() == 1) return constant(args[0]);
    if (name == "bump" && args.size() == 5) return bump(args[0], {args[1], args[2], args[3], args[4]});
    throw ConfigError("unknown node descriptor: " + token);
}

HierarchicalModel HierarchicalModel::uniform(int level, const Node& g) {
    if (level < 1) throw ConfigError("hierarchy level must be at least 1");
    HierarchicalModel m;
    m.level = level;
    for (int k = 1; k <= level; ++k) {
        int count = 1;
        for (int i = 0; i < level - k; ++i) count *= 4;
        m.nodes.emplace_back(count, g);
    }
    return m;
}

void HierarchicalModel::validate() const {
    if (level < 1) throw ConfigError("hierarchy level must be at least 1");
    if (static_cast<int>(nodes.size()) != level) throw ConfigError("hierarchy needs one node list per level");
    for (int k = 1; k <= level; ++k) {
        std::size_t count = 1;
        for (int i = 0; i < level - k; ++i) count *= 4;
        if (nodes[k - 1].size() != count) throw ConfigError("wrong node count at a hierarchy level");
    }
}

double HierarchicalModel::lipschitz() const {
    double c = 0.0;
    for (const auto& lv : nodes)
        for (const auto& g : lv) c = std::max(c, g.lipschitz());
    return c;
}

std::string HierarchicalModel::descriptor() const {
    std::string out;
    for (std::size_t k = 0; k < nodes.size(); ++k) {
        if (k) out += '/';
        for (std::size_t s = 0; s < nodes[k].size(); ++s) {
            if (s) out += ' ';
            out += nodes[k][s].descriptor();
        }
    }
    return out;
}

HierarchicalModel HierarchicalModel::parse(const std::string& desc) {
    HierarchicalModel m;
    std::stringstream levels(desc);
    std::string lv;
    while (std::getline(levels, lv, '/')) {
        std::stringstream toks(lv);
        std::string tok;
        std::vector<Node> row;
        while (toks >> tok) row.push_back(Node::parse(tok));
        m.nodes.push_back(row);
    }
    m.level = static_cast<int>(m.nodes.size());
    // a single node per level is shorthand for a uniform level
    for (int k = 1; k <= m.level; ++k) {
        std::size_t count = 1;
        for (int i = 0; i < m.level - k; ++i) count *= 4;
        if (m.nodes[k - 1].size() == 1 && count > 1) m.nodes[k - 1].assign(count, m.nodes[k - 1][0]);
    }
    m.validate();
    return m;
}

double eval_hierarchy_at(const HierarchicalModel& model, const ImageGrid& x, int i0, int j0) {
    return eval_hierarchy_generic(
        model.level, [&](int k, int s, const Quad& z) { return model.nodes[k - 1][s - 1].eval(z); },
        [&](int i, int j) { return x.at(i, j); }, i0, j0);
}

double eval_hierarchy(const HierarchicalModel& model, const ImageGrid& patch) {
    if (patch.d1() != model.side() || patch.d2() != model.side())
        throw ConfigError("patch side must equal 2^level");
    return eval_hierarchy_at(model, patch, 0, 0);
}

double eval_maxpool_model(const HierarchicalModel& model, const ImageGrid& x) {
    const int side = model.side();
    if (side > std::min(x.d1(), x.d2())) throw ConfigError("hierarchy window larger than image");
    double best = -1e300;
    for (int i = 0; i + side <= x.d1(); ++i)
        for (int j = 0; j + side <= x.d2(); ++j) best = std::max(best, eval_hierarchy_at(model, x, i, j));
    return best;
}

std::string PixelLaw::descriptor() const {
    return kind == PixelLawKind::IidUniform ? "iid-uniform" : "blockwise-smooth(" + std::to_string(coarse) + ")";
}

PixelLaw PixelLaw::parse(const std::string& s) {
    PixelLaw law;
    if (s == "iid-uniform") return law;
    std::string name;
    const auto args = parse_args(s, name);
    if (name == "blockwise-smooth") {
        law.kind = PixelLawKind::BlockwiseSmooth;
        if (!args.empty()) law.coarse = static_cast<int>(args[0]);
        if (law.coarse < 2) throw ConfigError("blockwise-smooth law needs a coarse grid of side >= 2");
        return law;
    }
    throw ConfigError("unknown pixel law: " + s);
}

std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t index) {
    // splitmix64 finaliser over (seed, index)
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

ImageGrid sample_image(int d1, int d2, const PixelLaw& law, Rng& rng) {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::vector<double> px(static_cast<std::size_t>(d1) * d2);
    if (law.kind == PixelLawKind::IidUniform) {
        for (double& v : px) v = unif(rng);
        return ImageGrid(d1, d2, std::move(px));
    }
    const int c = law.coarse;
    std::vector<double> coarse(static_cast<std::size_t>(c) * c);
    for (double& v : coarse) v = unif(rng);
    for (int i = 0; i < d1; ++i) {
        const double u = d1 > 1 ? static_cast<double>(i) * (c - 1) / (d1 - 1) : 0.0;
        const int i0 = std::min(static_cast<int>(u), c - 2);
        const double fu = u - i0;
        for (int j = 0; j < d2; ++j) {
            const double v = d2 > 1 ? static_cast<double>(j) * (c - 1) / (d2 - 1) : 0.0;
            const int j0 = std::min(static_cast<int>(v), c - 2);
            const double fv = v - j0;
            const double val = (1 - fu) * (1 - fv) * coarse[i0 * c + j0] + (1 - fu) * fv * coarse[i0 * c + j0 + 1] +
                               fu * (1 - fv) * coarse[(i0 + 1) * c + j0] + fu * fv * coarse[(i0 + 1) * c + j0 + 1];
            px[static_cast<std::size_t>(i) * d2 + j] = clamp01(val);
        }
    }
    return ImageGrid(d1, d2, std::move(px));
}

std::vector<LabeledSample> sample_dataset(const GeneratorConfig& gen) {
    if (gen.n < 1) throw ConfigError("sample count must be positive");
    gen.model.validate();
    std::vector<LabeledSample> out;
    out.reserve(gen.n);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (int i = 0; i < gen.n; ++i) {
        Rng rng(substream_seed(gen.seed, static_cast<std::uint64_t>(i)));
        ImageGrid x = sample_image(gen.d1, gen.d2, gen.law, rng);
        const double eta = eval_maxpool_model(gen.model, x);
        const int y = unif(rng) < eta ? 1 : -1;
        out.push_back(LabeledSample{std::move(x), y});
    }
    return out;
}

std::vector<ImageGrid> sample_images(const GeneratorConfig& gen) {
    std::vector<ImageGrid> out;
    out.reserve(gen.n);
    for (int i = 0; i < gen.n; ++i) {
        Rng rng(substream_seed(gen.seed, static_cast<std::uint64_t>(i)));
        out.push_back(sample_image(gen.d1, gen.d2, gen.law, rng));
    }
    return out;
}

int bayes_decide_eta(double eta) { return eta >= 0.5 ? 1 : -1; }

int bayes_decide(const HierarchicalModel& model, const ImageGrid& x) {
    return bayes_decide_eta(eval_maxpool_model(model, x));
}

RegretEstimate empirical_regret(const Classifier& classifier, const HierarchicalModel& model,
                                const std::vector<ImageGrid>& test_x, int mc_labels, std::uint64_t seed) {
    if (test_x.empty()) throw ConfigError("empirical_regret: empty test set");
    RegretEstimate r;
    Rng rng(seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    long long err_c = 0, err_b = 0, draws = 0;
    for (const auto& x : test_x) {
        const double eta = eval_maxpool_model(model, x);
        const int c = classifier(x);
        const int b = bayes_decide_eta(eta);
        if (c != b) r.exact += std::abs(2.0 * eta - 1.0);
        for (int t = 0; t < mc_labels; ++t) {
            const int y = unif(rng) < eta ? 1 : -1;
            err_c += (c != y);
            err_b += (b != y);
            ++draws;
        }
    }
    r.exact /= static_cast<double>(test_x.size());
    if (draws > 0) r.mc = static_cast<double>(err_c - err_b) / static_cast<double>(draws);
    return r;
}

double margin_condition_mc(const HierarchicalModel& model, const GeneratorConfig& gen, double n, int trials) {
    if (trials < 1) throw ConfigError("margin_condition_mc: trials must be positive");
    const double threshold = std::pow(n, 0.25);
    int hits = 0;
    for (int t = 0; t < trials; ++t) {
        Rng rng(substream_seed(gen.seed ^ 0x6d617267696eULL, static_cast<std::uint64_t>(t)));
        const ImageGrid x = sample_image(gen.d1, gen.d2, gen.law, rng);
        const double eta = eval_maxpool_model(model, x);
        if (eta <= 0.0 || eta >= 1.0) {
            ++hits;
            continue;
        }
        if (std::max(eta / (1.0 - eta), (1.0 - eta) / eta) > threshold) ++hits;
    }
    return static_cast<double>(hits) / trials;
}

double clamped_logit(double eta) {
    if (eta <= 0.0) return -kLogitClamp;
    if (eta >= 1.0) return kLogitClamp;
    return std::max(-kLogitClamp, std::min(kLogitClamp, std::log(eta / (1.0 - eta))));
}

SurrogateGap surrogate_gap_check(const std::function<double(const ImageGrid&)>& f, const HierarchicalModel& model,
                                 const std::vector<ImageGrid>& test_x) {
    if (test_x.empty()) throw ConfigError("surrogate_gap_check: empty test set");
    SurrogateGap g;
    for (const auto& x : test_x) {
        const double eta = eval_maxpool_model(model, x);
        const double fx = f(x);
        if (sign_label(fx) != bayes_decide_eta(eta)) g.lhs += std::abs(2.0 * eta - 1.0);
        const double fs = clamped_logit(eta);
        auto risk = [eta](double z) { return eta * logistic_loss(z) + (1.0 - eta) * logistic_loss(-z); };
        g.excess_risk += std::max(0.0, risk(fx) - risk(fs));
    }
    const double m = static_cast<double>(test_x.size());
    g.lhs /= m;
    g.excess_risk /= m;
    g.rhs = std::sqrt(2.0) * std::sqrt(g.excess_risk);
    g.rhs_stated = std::sqrt(g.excess_risk) / std::sqrt(2.0);
    return g;
}

std::string write_dataset(const GeneratorConfig& gen, const std::vector<LabeledSample>& data) {
    std::string out = std::to_string(gen.d1) + "," + std::to_string(gen.d2) + "," + std::to_string(data.size()) +
                      "," + std::to_string(gen.seed) + "," + gen.model.descriptor() + "\n";
    for (const auto& s : data) {
        out += std::to_string(s.y);
        for (double v : s.x.pixels()) {
            out += ',';
            out += fmt(v);
        }
        out += '\n';
    }
    return out;
}

std::vector<LabeledSample> read_dataset(const std::string& text, GeneratorConfig* header) {
    std::stringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw ConfigError("dataset: missing header");
    std::vector<std::string> h;
    {
        std::stringstream hs(line);
        std::string f;
        while (std::getline(hs, f, ',')) h.push_back(f);
    }
    if (h.size() != 5) throw ConfigError("dataset: header must have 5 fields");
    const int d1 = std::stoi(h[0]);
    const int d2 = std::stoi(h[1]);
    const int n = std::stoi(h[2]);
    if (header) {
        header->d1 = d1;
        header->d2 = d2;
        header->n = n;
        header->seed = std::stoull(h[3]);
        header->model = HierarchicalModel::parse(h[4]);
    }
    std::vector<LabeledSample> data;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ls(line);
        std::string f;
        std::getline(ls, f, ',');
        const int y = std::stoi(f);
        std::vector<double> px;
        while (std::getline(ls, f, ',')) px.push_back(std::stod(f));
        data.push_back(LabeledSample{ImageGrid(d1, d2, std::move(px)), y});
    }
    if (static_cast<int>(data.size()) != n) throw ConfigError("dataset: sample count does not match header");
    return data;
}

}  // namespace cnnsgd
