#include <gtest/gtest.h>

#include "cnnsgd/embed.hpp"
#include "cnnsgd/gadgets.hpp"
#include "cnnsgd/hmax.hpp"

using namespace cnnsgd;

TEST(Mean4, ExactOnAllOfR4) {
    const FeedForwardNet m = mean4_net();
    EXPECT_DOUBLE_EQ(eval_ffnet(m, {1.0, -2.0, 3.0, 6.0}), 2.0);
    EXPECT_DOUBLE_EQ(eval_ffnet(m, {-1.0, -1.0, -1.0, -1.0}), -1.0);
}

TEST(Embedding, LevelOneMeanMatchesMaxPoolModel) {
    const EmbeddedCnn e = cnn_from_ffnets({{mean4_net()}}, 1);
    const auto model = HierarchicalModel::uniform(1, Node::mean());
    Rng rng(21);
    for (int i = 0; i < 100; ++i) {
        const ImageGrid x = sample_image(4, 4, PixelLaw{}, rng);
        EXPECT_NEAR(cnn_value(e.config, e.params, x), eval_maxpool_model(model, x), 1e-9);
    }
}

TEST(Embedding, LevelTwoMatchesDirectNodeNetworks) {
    std::vector<std::vector<FeedForwardNet>> nets{std::vector<FeedForwardNet>(4, mean4_net()), {mean4_net()}};
    const EmbeddedCnn e = cnn_from_ffnets(nets, 2);
    Rng rng(22);
    for (int i = 0; i < 20; ++i) {
        const ImageGrid x = sample_image(5, 5, PixelLaw{}, rng);
        EXPECT_NEAR(cnn_value(e.config, e.params, x), eval_ffnet_hierarchy(nets, 2, x), 1e-9);
    }
}

TEST(Embedding, ConstantImageGivesFixedPoint) {
    const EmbeddedCnn e = cnn_from_ffnets({{mean4_net()}}, 1);
    EXPECT_NEAR(cnn_value(e.config, e.params, ImageGrid::filled(4, 4, 0.35)), 0.35, 1e-12);
}

TEST(Embedding, ChannelCountAndWeights) {
    const FeedForwardNet g = mean4_net();
    const EmbeddedCnn e = cnn_from_ffnets({{g}}, 1);
    for (int k : e.config.channels) EXPECT_EQ(k, 4 + e.node_width);
    EXPECT_EQ(e.config.L1, e.node_depth + 1);
    const double bound = std::max(1.0, net_weight_stats(g).sup_norm);
    for (double v : e.params.flat) EXPECT_LE(std::abs(v), bound);
}

TEST(Embedding, MismatchedNodeNetworksThrow) {
    FeedForwardNet deeper = compose(identity_net(1, 1), mean4_net());
    EXPECT_ANY_THROW(cnn_from_ffnets({std::vector<FeedForwardNet>{mean4_net(), deeper, mean4_net(), mean4_net()},
                                      {mean4_net()}},
                                     2));
}
