#include "cnnsgd/ffnet.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>

#include "json.hpp"

namespace cnnsgd {

std::vector<int> FeedForwardNet::widths() const {
    std::vector<int> w;
    for (int l = 0; l < depth(); ++l) w.push_back(static_cast<int>(layers[l].b.size()));
    return w;
}

int FeedForwardNet::max_width() const {
    int m = 0;
    for (int w : widths()) m = std::max(m, w);
    return m;
}

void FeedForwardNet::validate() const {
    if (layers.empty()) throw ConfigError("network has no layers");
    int in = input_dim;
    for (const auto& L : layers) {
        if (L.W.cols() != in || L.W.rows() != L.b.size()) throw ConfigError("network layer shapes are inconsistent");
        in = static_cast<int>(L.b.size());
    }
}

WeightStats net_weight_stats(const FeedForwardNet& net) {
    WeightStats s;
    auto sup = [](const Mat& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; };
    auto supv = [](const VecX& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; };
    for (const auto& L : net.layers) s.sup_norm = std::max({s.sup_norm, sup(L.W), supv(L.b)});
    const auto& first = net.layers.front();
    const auto& last = net.layers.back();
    s.input_weight_sup = sup(first.W);
    s.input_layer_sup = std::max(s.input_weight_sup, supv(first.b));
    s.output_weight_sup = sup(last.W);
    s.output_layer_sup = std::max(s.output_weight_sup, supv(last.b));
    s.output_offset = last.b.size() ? last.b(0) : 0.0;
    return s;
}

VecX eval_ffnet_vec(const FeedForwardNet& net, const VecX& x) {
    if (x.size() != net.input_dim) throw ConfigError("network input has the wrong dimension");
    VecX z = x;
    for (int l = 0; l <= net.depth(); ++l) {
        VecX next = net.layers[l].W * z + net.layers[l].b;
        if (l < net.depth()) next = next.cwiseMax(0.0);
        z = std::move(next);
    }
    return z;
}

double eval_ffnet(const FeedForwardNet& net, const std::vector<double>& x) {
    const VecX out = eval_ffnet_vec(net, Eigen::Map<const VecX>(x.data(), static_cast<Eigen::Index>(x.size())));
    if (out.size() != 1) throw ConfigError("eval_ffnet expects a single-output network");
    return out(0);
}

FeedForwardNet affine_net(const Mat& W, const VecX& b) {
    if (W.rows() != b.size()) throw ConfigError("affine map shape mismatch");
    FeedForwardNet n;
    n.input_dim = static_cast<int>(W.cols());
    n.layers.push_back({W, b});
    return n;
}

FeedForwardNet identity_net(int m, int t) {
    if (m < 1 || t < 0) throw ConfigError("identity_net needs m >= 1 and t >= 0");
    FeedForwardNet n;
    n.input_dim = m;
    const Mat I = Mat::Identity(m, m);
    if (t == 0) {
        n.layers.push_back({I, VecX::Zero(m)});
        return n;
    }
    Mat first(2 * m, m);
    first << I, -I;
    n.layers.push_back({first, VecX::Zero(2 * m)});
    Mat carry(2 * m, 2 * m);
    carry << I, -I, -I, I;
    for (int l = 1; l < t; ++l) n.layers.push_back({carry, VecX::Zero(2 * m)});
    Mat out(m, 2 * m);
    out << I, -I;
    n.layers.push_back({out, VecX::Zero(m)});
    return n;
}

FeedForwardNet compose(const FeedForwardNet& outer, const FeedForwardNet& inner) {
    if (inner.output_dim() != outer.input_dim) throw ConfigError("compose: dimension mismatch");
    FeedForwardNet n;
    n.input_dim = inner.input_dim;
    for (int l = 0; l < inner.depth(); ++l) n.layers.push_back(inner.layers[l]);
    const auto& a = outer.layers.front();
    const auto& b = inner.layers.back();
    n.layers.push_back({a.W * b.W, a.W * b.b + a.b});
    for (int l = 1; l <= outer.depth(); ++l) n.layers.push_back(outer.layers[l]);
    return n;
}

FeedForwardNet parallel(const std::vector<FeedForwardNet>& nets) {
    if (nets.empty()) throw ConfigError("parallel: no networks");
    const int depth = nets.front().depth();
    const int in = nets.front().input_dim;
    for (const auto& n : nets)
        if (n.depth() != depth || n.input_dim != in) throw ConfigError("parallel: depth or input mismatch");
    FeedForwardNet out;
    out.input_dim = in;
    for (int l = 0; l <= depth; ++l) {
        int rows = 0, cols = 0;
        for (const auto& n : nets) {
            rows += static_cast<int>(n.layers[l].W.rows());
            cols += static_cast<int>(n.layers[l].W.cols());
        }
        if (l == 0) cols = in;
        Mat W = Mat::Zero(rows, cols);
        VecX b(rows);
        int r = 0, c = 0;
        for (const auto& n : nets) {
            const auto& L = n.layers[l];
            if (l == 0)
                W.block(r, 0, L.W.rows(), L.W.cols()) = L.W;
            else
                W.block(r, c, L.W.rows(), L.W.cols()) = L.W;
            b.segment(r, L.b.size()) = L.b;
            r += static_cast<int>(L.W.rows());
            c += static_cast<int>(L.W.cols());
        }
        out.layers.push_back({W, b});
    }
    return out;
}

FeedForwardNet deepen(const FeedForwardNet& net, int depth) {
    if (depth < net.depth()) throw ConfigError("deepen: target depth below current depth");
    if (depth == net.depth()) return net;
    return compose(identity_net(net.output_dim(), depth - net.depth()), net);
}

FeedForwardNet parallel_padded(const std::vector<FeedForwardNet>& nets) {
    int depth = 0;
    for (const auto& n : nets) depth = std::max(depth, n.depth());
    std::vector<FeedForwardNet> padded;
    padded.reserve(nets.size());
    for (const auto& n : nets) padded.push_back(deepen(n, depth));
    return parallel(padded);
}

FeedForwardNet compose_nets(const FeedForwardNet& f0, const std::vector<FeedForwardNet>& parts) {
    if (static_cast<int>(parts.size()) != f0.input_dim) throw ConfigError("compose_nets: need one part per input");
    for (const auto& p : parts)
        if (p.output_dim() != 1) throw ConfigError("compose_nets: parts must be single-output");
    return compose(f0, parallel(parts));
}

CompositionBounds composition_bounds(const FeedForwardNet& f0, const std::vector<FeedForwardNet>& parts) {
    CompositionBounds cb;
    const WeightStats s0 = net_weight_stats(f0);
    double v_bar = 0.0, out_bar = 0.0, out_bar_w = 0.0;
    bool zero_offsets = true;
    for (const auto& p : parts) {
        const WeightStats s = net_weight_stats(p);
        v_bar = std::max(v_bar, s.sup_norm);
        out_bar = std::max(out_bar, s.output_layer_sup);
        out_bar_w = std::max(out_bar_w, s.output_weight_sup);
        if (p.layers.back().b.cwiseAbs().maxCoeff() != 0.0) zero_offsets = false;
    }
    const double k = static_cast<double>(parts.size());
    cb.case_a = std::max({s0.sup_norm, v_bar, s0.input_layer_sup * (k * out_bar + 1.0)});
    cb.b_applies = zero_offsets;
    cb.case_b = std::max({s0.sup_norm, v_bar, s0.input_weight_sup * out_bar_w});
    cb.c_applies = zero_offsets && (s0.input_weight_sup <= 1.0 || out_bar_w <= 1.0);
    cb.case_c = std::max(s0.sup_norm, v_bar);
    return cb;
}

namespace {

std::string encode(const double* v, std::size_t n) {
    std::string out;
    char buf[40];
    for (std::size_t i = 0; i < n; ++i) {
        std::snprintf(buf, sizeof buf, "%.17g", v[i]);
        if (i) out += ' ';
        out += buf;
    }
    return out;
}

std::vector<double> decode(const std::string& s) {
    std::vector<double> out;
    const char* p = s.c_str();
    char* end = nullptr;
    while (*p) {
        const double v = std::strtod(p, &end);
        if (end == p) break;
        out.push_back(v);
        p = end;
    }
    return out;
}

}  // namespace

std::string write_ffnet(const FeedForwardNet& net) {
    nlohmann::ordered_json j;
    j["format"] = "cnnsgd-ffnet";
    j["version"] = 1;
    j["depth"] = net.depth();
    j["input_dim"] = net.input_dim;
    j["widths"] = net.widths();
    auto layers = nlohmann::ordered_json::array();
    for (const auto& L : net.layers) {
        // row-major weights
        Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rm = L.W;
        layers.push_back({{"rows", L.W.rows()},
                          {"cols", L.W.cols()},
                          {"W", encode(rm.data(), static_cast<std::size_t>(rm.size()))},
                          {"b", encode(L.b.data(), static_cast<std::size_t>(L.b.size()))}});
    }
    j["layers"] = layers;
    return j.dump(1) + "\n";
}

FeedForwardNet read_ffnet(const std::string& text) {
    const auto j = nlohmann::json::parse(text);
    if (j.value("format", "") != "cnnsgd-ffnet") throw ConfigError("not a network document");
    FeedForwardNet net;
    net.input_dim = j.at("input_dim").get<int>();
    for (const auto& L : j.at("layers")) {
        const auto rows = L.at("rows").get<Eigen::Index>();
        const auto cols = L.at("cols").get<Eigen::Index>();
        const auto w = decode(L.at("W").get<std::string>());
        const auto b = decode(L.at("b").get<std::string>());
        if (static_cast<Eigen::Index>(w.size()) != rows * cols || static_cast<Eigen::Index>(b.size()) != rows)
            throw ConfigError("network layer size mismatch");
        Mat W = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(w.data(),
                                                                                                          rows, cols);
        net.layers.push_back({W, Eigen::Map<const VecX>(b.data(), rows)});
    }
    net.validate();
    if (net.depth() != j.at("depth").get<int>()) throw ConfigError("network depth field mismatch");
    return net;
}

}  // namespace cnnsgd
