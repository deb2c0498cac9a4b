#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cnnsgd/cnn.hpp"

namespace cnnsgd {

using Mat = Eigen::MatrixXd;
using VecX = Eigen::VectorXd;

// Layered ReLU network: layers[0..L-1] are hidden (ReLU), layers[L] is the affine output.
// Each layer maps its input through W * z + b; b plays the role of the offset column j = 0.
struct FeedForwardNet {
    struct Layer {
        Mat W;
        VecX b;
    };

    int input_dim = 1;
    std::vector<Layer> layers;

    int depth() const { return static_cast<int>(layers.size()) - 1; }
    int output_dim() const { return static_cast<int>(layers.back().b.size()); }
    std::vector<int> widths() const;  // hidden widths k_1..k_L
    int max_width() const;
    void validate() const;
};

struct WeightStats {
    double sup_norm = 0.0;
    double output_offset = 0.0;    // first output's offset
    double input_layer_sup = 0.0;  // layer 0, offsets included
    double output_layer_sup = 0.0; // last layer, offsets included
    double input_weight_sup = 0.0;   // layer 0 without offsets
    double output_weight_sup = 0.0;  // last layer without offsets
};

WeightStats net_weight_stats(const FeedForwardNet& net);

double eval_ffnet(const FeedForwardNet& net, const std::vector<double>& x);
VecX eval_ffnet_vec(const FeedForwardNet& net, const VecX& x);

// ---- network algebra ----
FeedForwardNet affine_net(const Mat& W, const VecX& b);
// f_id^t applied coordinatewise to m inputs (t >= 1); t = 0 gives the affine identity
FeedForwardNet identity_net(int m, int t);
// outer(inner(x)): the inner output layer is merged into the outer input layer
FeedForwardNet compose(const FeedForwardNet& outer, const FeedForwardNet& inner);
// stacked outputs of nets sharing the input, all of equal depth
FeedForwardNet parallel(const std::vector<FeedForwardNet>& nets);
// pads with identity layers to the requested depth
FeedForwardNet deepen(const FeedForwardNet& net, int depth);
FeedForwardNet parallel_padded(const std::vector<FeedForwardNet>& nets);
// f0 with k inputs fed by k single-output parts of equal depth and input dimension
FeedForwardNet compose_nets(const FeedForwardNet& f0, const std::vector<FeedForwardNet>& parts);

struct CompositionBounds {
    double case_a = 0.0;
    double case_b = 0.0;  // valid when every part has zero output offset
    double case_c = 0.0;  // valid when additionally one of the two merged sups is <= 1
    bool b_applies = false;
    bool c_applies = false;
};

CompositionBounds composition_bounds(const FeedForwardNet& f0, const std::vector<FeedForwardNet>& parts);

std::string write_ffnet(const FeedForwardNet& net);
FeedForwardNet read_ffnet(const std::string& text);

}  // namespace cnnsgd
