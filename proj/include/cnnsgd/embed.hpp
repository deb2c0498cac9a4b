#pragma once

#include <vector>

#include "cnnsgd/cnn.hpp"
#include "cnnsgd/ffnet.hpp"

namespace cnnsgd {

struct EmbeddedCnn {
    CnnConfig config;
    CnnParams params;
    int node_depth = 0;  // common hidden depth of the node networks
    int node_width = 0;  // common (padded) hidden width
};

// Builds a CNN whose output is the max over windows of the hierarchy whose node (k, s)
// is computed by g_nets[k-1][s-1] (4 inputs, 1 output, common depth).
EmbeddedCnn cnn_from_ffnets(const std::vector<std::vector<FeedForwardNet>>& g_nets, int level);

// Hierarchy max-pool evaluated directly with the node networks.
double eval_ffnet_hierarchy(const std::vector<std::vector<FeedForwardNet>>& g_nets, int level, const ImageGrid& x);

// Exact one-hidden-layer network for the mean of 4 inputs, valid on all of R^4.
FeedForwardNet mean4_net();

}  // namespace cnnsgd
