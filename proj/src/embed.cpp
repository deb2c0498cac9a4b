#include "cnnsgd/embed.hpp"

#include <algorithm>
#include <array>

#include "cnnsgd/hmax.hpp"

namespace cnnsgd {

namespace {

int node_count(int level) {
    int n = 0;
    for (int k = 1; k <= level; ++k) n += 1 << (2 * (level - k));
    return n;
}

}  // namespace

FeedForwardNet mean4_net() {
    FeedForwardNet n;
    n.input_dim = 4;
    Mat W0(8, 4);
    W0 << Mat::Identity(4, 4), -Mat::Identity(4, 4);
    n.layers.push_back({W0, VecX::Zero(8)});
    Mat W1(1, 8);
    W1 << 0.25, 0.25, 0.25, 0.25, -0.25, -0.25, -0.25, -0.25;
    n.layers.push_back({W1, VecX::Zero(1)});
    return n;
}

double eval_ffnet_hierarchy(const std::vector<std::vector<FeedForwardNet>>& g_nets, int level, const ImageGrid& x) {
    const int side = 1 << level;
    if (side > std::min(x.d1(), x.d2())) throw ConfigError("hierarchy window larger than image");
    double best = -1e300;
    auto node = [&](int k, int s, const Quad& z) { return eval_ffnet(g_nets[k - 1][s - 1], {z[0], z[1], z[2], z[3]}); };
    auto pixel = [&](int i, int j) { return x.at(i, j); };
    for (int i = 0; i + side <= x.d1(); ++i)
        for (int j = 0; j + side <= x.d2(); ++j) best = std::max(best, eval_hierarchy_generic(level, node, pixel, i, j));
    return best;
}

EmbeddedCnn cnn_from_ffnets(const std::vector<std::vector<FeedForwardNet>>& g_nets, int level) {
    if (level < 1 || static_cast<int>(g_nets.size()) != level) throw ConfigError("need one list of node nets per level");
    int Q = -1, r = 0;
    for (int k = 1; k <= level; ++k) {
        if (static_cast<int>(g_nets[k - 1].size()) != 1 << (2 * (level - k)))
            throw ConfigError("level " + std::to_string(k) + " needs 4^(l-k) node nets");
        for (const auto& g : g_nets[k - 1]) {
            g.validate();
            if (g.input_dim != 4 || g.output_dim() != 1) throw ConfigError("node nets map R^4 to R");
            if (Q < 0) Q = g.depth();
            if (g.depth() != Q || Q < 1) throw ConfigError("node nets must share a depth >= 1");
            r = std::max(r, g.max_width());
        }
    }
    const int Ntot = node_count(level);
    const int K = 2 + 2 * Ntot + r;
    const int L1 = Ntot * Q + level;

    EmbeddedCnn out;
    out.node_depth = Q;
    out.node_width = r;
    CnnConfig& cfg = out.config;
    cfg.L1 = L1;
    cfg.channels.assign(L1, K);
    for (int s = 1; s <= L1; ++s) cfg.filter_sizes.push_back(1 << schedule_pi(s, level, Q));
    cfg.L2 = 2;
    cfg.beta = 1.0;
    out.params = CnnParams::zeros(cfg);
    const CnnLayout lay(cfg);
    auto& th = out.params.flat;

    // layer schedule: level-k node j has hidden layers start_k + jQ + t and is stored at start_k + (j+1)Q
    struct Slot {
        int level = 0, s = 0, id = -1, t = -1;
    };
    std::vector<Slot> hidden_at(L1 + 1), store_at(L1 + 1);
    std::vector<std::vector<int>> ids(level + 1);
    {
        int start = 1, id = 0;
        for (int k = 1; k <= level; ++k) {
            const int nk = 1 << (2 * (level - k));
            for (int j = 0; j < nk; ++j, ++id) {
                ids[k].push_back(id);
                for (int t = 0; t < Q; ++t) hidden_at[start + j * Q + t] = {k, j + 1, id, t};
                store_at[start + (j + 1) * Q] = {k, j + 1, id, Q};
            }
            start += nk * Q + 1;
        }
    }
    const int HID = 2 + 2 * Ntot;
    auto store_p = [](int id) { return 2 + 2 * id; };

    for (int s = 1; s <= L1; ++s) {
        // carries
        if (s == 1) {
            th[lay.conv_w(1, 0, 0, 0, 0)] = 1.0;
            th[lay.conv_w(1, 0, 0, 0, 1)] = -1.0;
        } else {
            for (int c = 0; c < HID; ++c) th[lay.conv_w(s, 0, 0, c, c)] = 1.0;
        }
        if (hidden_at[s].id >= 0) {
            const Slot& h = hidden_at[s];
            const FeedForwardNet& g = g_nets[h.level - 1][h.s - 1];
            const auto& L = g.layers[h.t];
            for (int u = 0; u < L.W.rows(); ++u) {
                th[lay.conv_b(s, HID + u)] = L.b(u);
                if (h.t == 0) {
                    const int off = 1 << (h.level - 1);
                    const std::array<std::array<int, 2>, 4> taps{{{0, 0}, {0, off}, {off, 0}, {off, off}}};
                    for (int c = 0; c < 4; ++c) {
                        const auto [t1, t2] = taps[c];
                        if (h.level == 1) {
                            if (s == 1) {
                                th[lay.conv_w(s, t1, t2, 0, HID + u)] += L.W(u, c);
                            } else {
                                th[lay.conv_w(s, t1, t2, 0, HID + u)] += L.W(u, c);
                                th[lay.conv_w(s, t1, t2, 1, HID + u)] -= L.W(u, c);
                            }
                        } else {
                            const int child = ids[h.level - 1][4 * (h.s - 1) + c];
                            th[lay.conv_w(s, t1, t2, store_p(child), HID + u)] += L.W(u, c);
                            th[lay.conv_w(s, t1, t2, store_p(child) + 1, HID + u)] -= L.W(u, c);
                        }
                    }
                } else {
                    for (int v = 0; v < L.W.cols(); ++v) th[lay.conv_w(s, 0, 0, HID + v, HID + u)] = L.W(u, v);
                }
            }
        }
        if (store_at[s].id >= 0) {
            const Slot& st = store_at[s];
            const auto& L = g_nets[st.level - 1][st.s - 1].layers.back();
            const int cp = store_p(st.id);
            th[lay.conv_b(s, cp)] = L.b(0);
            th[lay.conv_b(s, cp + 1)] = -L.b(0);
            for (int v = 0; v < L.W.cols(); ++v) {
                th[lay.conv_w(s, 0, 0, HID + v, cp)] = L.W(0, v);
                th[lay.conv_w(s, 0, 0, HID + v, cp + 1)] = -L.W(0, v);
            }
        }
    }
    const int top = store_p(Ntot - 1);
    th[lay.out_w(top)] = 1.0;
    th[lay.out_w(top + 1)] = -1.0;
    // head: sigma(z) - sigma(-z)
    th[lay.head_out(0)] = 1.0;
    th[lay.head_in_w(0)] = 1.0;
    th[lay.head_out(1)] = -1.0;
    th[lay.head_in_w(1)] = -1.0;
    return out;
}

}  // namespace cnnsgd
