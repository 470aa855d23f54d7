#include <gtest/gtest.h>

#include "scnn/gradcheck.hpp"
#include "scnn/model.hpp"
#include "scnn/network.hpp"
#include "scnn/rng.hpp"

using namespace scnn;

namespace {

Tensor random_input(std::size_t len, std::size_t dim, std::uint64_t seed) {
  Rng rng(seed);
  Tensor t({len, dim});
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = rng.uniform(-0.8, 0.8);
  return t;
}

Network preset_network(const ModelConfig& base, std::size_t window, std::size_t dim,
                       std::uint64_t seed) {
  ModelConfig cfg = base;
  cfg.window = window;
  cfg.embed_dim = dim;
  Network net = build_model(cfg);
  Rng rng = Rng::stream(seed, 1);
  net.init_parameters(rng);
  return net;
}

}  // namespace

TEST(Network, RejectsBadLayerGrammar) {
  // Softmax must be last and present.
  EXPECT_THROW(Network({LayerSpec::fully_connected(4)}, 6, 3), ConfigError);
  EXPECT_THROW(Network({LayerSpec::softmax(2), LayerSpec::activation()}, 6, 3),
               ConfigError);
  // Conv block must be conv -> relu -> pool.
  EXPECT_THROW(Network({LayerSpec::convolution({2}, 3), LayerSpec::max_pool(2),
                        LayerSpec::softmax(2)},
                       6, 3),
               ConfigError);
  // Kernel wider than the input it meets.
  EXPECT_THROW(Network({LayerSpec::convolution({9}, 3), LayerSpec::activation(),
                        LayerSpec::max_pool(2), LayerSpec::softmax(2)},
                       6, 3),
               ConfigError);
}

TEST(Network, PresetFeatureDimensions) {
  const std::size_t window = 20, dim = 12;
  Network s = preset_network(sentiment_config(), window, dim, 1);
  Network e = preset_network(emotion_config(), window, dim, 1);
  Network p = preset_network(personality_config("openness"), window, dim, 1);
  Network b = preset_network(baseline_config(), window, dim, 1);

  EXPECT_EQ(s.feature_dim(), 100u);
  EXPECT_EQ(e.feature_dim(), 150u);
  EXPECT_EQ(p.feature_dim(), 150u);
  EXPECT_EQ(b.feature_dim(), 100u);

  EXPECT_EQ(s.num_classes(), 3u);
  EXPECT_EQ(e.num_classes(), 6u);
  EXPECT_EQ(p.num_classes(), 2u);
  EXPECT_EQ(b.num_classes(), 2u);

  // 5 personality traits contribute 150 each.
  EXPECT_EQ(s.feature_dim() + e.feature_dim() + 5 * p.feature_dim() + b.feature_dim(),
            1100u);
}

TEST(Network, MultiWidthConcatTruncatesToShortest) {
  // widths {4,5} over 20 tokens: pooled lengths ceil(17/2)=9 and ceil(16/2)=8;
  // the concatenated block must use 8 rows of each.
  ModelConfig cfg = sentiment_config();
  cfg.window = 20;
  cfg.embed_dim = 6;
  Network net = build_model(cfg);
  Rng rng(3);
  net.init_parameters(rng);
  const Tensor probs = net.logits(random_input(20, 6, 4));
  EXPECT_EQ(probs.size(), 3u);  // reached softmax without shape errors
}

TEST(Network, ForwardIsDeterministicAndFinite) {
  Network a = preset_network(baseline_config(), 15, 8, 42);
  Network b = preset_network(baseline_config(), 15, 8, 42);
  const Tensor input = random_input(15, 8, 2);
  const Tensor la = a.logits(input);
  const Tensor lb = b.logits(input);
  ASSERT_EQ(la.size(), lb.size());
  for (std::size_t i = 0; i < la.size(); ++i) EXPECT_DOUBLE_EQ(la[i], lb[i]);
  EXPECT_TRUE(la.all_finite());
}

TEST(Network, FeaturesComeFromFcLayer) {
  Network net = preset_network(emotion_config(), 14, 9, 7);
  const Tensor f = net.features(random_input(14, 9, 3));
  EXPECT_EQ(f.size(), 150u);
  for (std::size_t i = 0; i < f.size(); ++i) EXPECT_GE(f[i], 0.0);  // post-ReLU
}

TEST(NetworkGradients, SmallCompositionExhaustive) {
  // Tiny network checked on every coordinate.
  Network net({LayerSpec::convolution({2, 3}, 3), LayerSpec::activation(),
               LayerSpec::max_pool(2), LayerSpec::fully_connected(5),
               LayerSpec::activation(), LayerSpec::softmax(3)},
              7, 4);
  Rng rng(9);
  net.init_parameters(rng);
  const Tensor input = random_input(7, 4, 10);
  const GradientReport report = gradient_check(net, input, 1, 1e-5, 100000, 1);
  EXPECT_LT(report.max_relative_error, 1e-4);
  EXPECT_GT(report.coordinates_checked, 100u);
}

TEST(NetworkGradients, AllPresetsSampled) {
  struct Case {
    ModelConfig cfg;
    std::size_t gold;
  };
  const std::vector<Case> cases = {
      {sentiment_config(), 2},
      {emotion_config(), 4},
      {personality_config("neuroticism"), 1},
      {baseline_config(), 0},
  };
  for (const auto& c : cases) {
    ModelConfig cfg = c.cfg;
    cfg.window = 16;
    cfg.embed_dim = 10;
    Network net = build_model(cfg);
    Rng rng = Rng::stream(5, 1);
    net.init_parameters(rng);
    const Tensor input = random_input(16, 10, 6);
    const GradientReport report = gradient_check(net, input, c.gold, 1e-5, 160, 2);
    EXPECT_LT(report.max_relative_error, 1e-4) << cfg.name();
  }
}

TEST(NetworkGradients, StaticChannelSlotsStayConstant) {
  ModelConfig cfg = baseline_config();
  cfg.window = 12;
  cfg.embed_dim = 6;
  Network net = append_static_channel(cfg, {4, 3});
  EXPECT_EQ(net.static_dim(), 7u);
  EXPECT_EQ(net.softmax_input_dim(), cfg.fc_units + 7u);

  Rng rng = Rng::stream(8, 1);
  net.init_parameters(rng);
  const Tensor input = random_input(12, 6, 11);
  Tensor statics({7});
  for (std::size_t i = 0; i < 7; ++i) statics[i] = 0.3 * static_cast<double>(i) - 1.0;

  const GradientReport report =
      gradient_check(net, input, 1, 1e-5, 200, 3, &statics);
  EXPECT_LT(report.max_relative_error, 1e-4);

  // Same input, different static features => different logits.
  const Tensor l1 = net.logits(input, &statics);
  Tensor statics2 = statics;
  statics2[0] += 1.0;
  const Tensor l2 = net.logits(input, &statics2);
  bool changed = false;
  for (std::size_t i = 0; i < l1.size(); ++i) changed |= l1[i] != l2[i];
  EXPECT_TRUE(changed);

  // Forward without the promised static features must fail loudly.
  EXPECT_THROW(net.logits(input), ShapeError);
}

TEST(NetworkGradients, ZeroLossMeansZeroGradient) {
  Network net({LayerSpec::fully_connected(4), LayerSpec::activation(),
               LayerSpec::softmax(2)},
              3, 2);
  Rng rng(12);
  net.init_parameters(rng);
  const Tensor input = random_input(3, 2, 13);

  // Drive the gold logit sky-high through the head bias.
  auto params = net.parameters();
  Tensor* head_bias = params.back();
  (*head_bias)[0] = 500.0;
  Gradients grads;
  const double loss = net.loss_and_gradients(input, 0, grads);
  EXPECT_NEAR(loss, 0.0, 1e-12);
  for (const Tensor& g : grads.params) {
    for (std::size_t i = 0; i < g.size(); ++i) EXPECT_NEAR(g[i], 0.0, 1e-12);
  }
}
