#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "oracles.hpp"
#include "pmtnet/errors.hpp"
#include "pmtnet/models.hpp"

using namespace pmtnet;

namespace {

PreprocessedGrid random_grid(Prng& prng) {
  PreprocessedGrid g;
  for (double& v : g.values) v = prng.uniform(0.0, 1.0);
  return g;
}

std::vector<std::size_t> layer_params(const Model& m) {
  std::vector<std::size_t> out;
  for (const auto& l : m.layers)
    if (l.spec.has_params()) out.push_back(l.state.param_count());
  return out;
}

}  // namespace

TEST(SupervisedCnn, ActivationShapeChain) {
  const Model m = build_supervised_cnn();
  const std::vector<Shape4> expect{{1, 71, 6, 22}, {1, 71, 3, 11}, {1, 88, 2, 10},
                                   {1, 88, 1, 5},  {1, 26, 1, 1},  {1, 5, 1, 1}};
  EXPECT_EQ(activation_shapes(m), expect);
  EXPECT_EQ(m.feature_layer, 4u);
}

TEST(SupervisedCnn, ParameterCounts) {
  // (3*3*1 + 1)*71, (2*2*71 + 1)*88, 440*26 + 26, 26*5 + 5
  const Model m = build_supervised_cnn();
  EXPECT_EQ(layer_params(m), (std::vector<std::size_t>{710, 25080, 11466, 135}));
  EXPECT_EQ(m.param_count(), 710u + 25080u + 11466u + 135u);
}

TEST(ConvAutoencoder, ActivationShapeChain) {
  const Model m = build_conv_autoencoder();
  const std::vector<Shape4> expect{{1, 16, 8, 24}, {1, 16, 4, 12}, {1, 16, 4, 10}, {1, 16, 2, 5},
                                   {1, 10, 1, 1},  {1, 16, 2, 4},  {1, 16, 4, 11}, {1, 1, 8, 24}};
  EXPECT_EQ(activation_shapes(m), expect);
  EXPECT_EQ(m.feature_layer, 4u);
}

TEST(ConvAutoencoder, ParameterCounts) {
  // (25+1)*16, (9*16+1)*16, 160*10+10, 10*16*8+16, 16*16*10+16, 16*8+1
  const Model m = build_conv_autoencoder();
  EXPECT_EQ(layer_params(m), (std::vector<std::size_t>{416, 2320, 1610, 1296, 2576, 129}));
}

TEST(MakeModel, RejectsBrokenChain) {
  const std::vector<LayerSpec> specs{LayerSpec::conv(1, 4, {3, 3}, {0, 0}, Activation::Tanh),
                                     LayerSpec::dense(100, 5, Activation::Softmax)};
  EXPECT_THROW(make_model(ModelKind::SupervisedCnn, {1, 1, 8, 24}, specs, 0, {}), BuildError);
  EXPECT_THROW(make_model(ModelKind::SupervisedCnn, {1, 1, 8, 24}, {}, 0, {}), BuildError);
}

TEST(MakeModel, SeededInitIsDeterministic) {
  const Model a = build_supervised_cnn({InitScheme::GlorotUniform, 5});
  const Model b = build_supervised_cnn({InitScheme::GlorotUniform, 5});
  const Model c = build_supervised_cnn({InitScheme::GlorotUniform, 6});
  EXPECT_EQ(serialize_model(a), serialize_model(b));
  EXPECT_NE(serialize_model(a), serialize_model(c));
}

TEST(Predict, ProbabilitiesSumToOne) {
  const Model m = build_supervised_cnn();
  Prng prng(1);
  for (int rep = 0; rep < 5; ++rep) {
    const auto p = predict(m, random_grid(prng));
    EXPECT_NEAR(std::accumulate(p.probs.begin(), p.probs.end(), 0.0), 1.0, 1e-12);
    const auto best = std::max_element(p.probs.begin(), p.probs.end()) - p.probs.begin();
    EXPECT_EQ(index_of(p.label), static_cast<std::size_t>(best));
  }
}

TEST(Predict, UntrainedNearUniformOnSymmetricInput) {
  const Model m = build_supervised_cnn();
  PreprocessedGrid g;
  g.values.fill(0.5);
  for (double p : predict(m, g).probs) EXPECT_NEAR(p, 0.2, 0.1);
}

TEST(Predict, DeterministicAndBatchConsistent) {
  const Model m = build_supervised_cnn({InitScheme::GlorotUniform, 3});
  Prng prng(2);
  std::vector<PreprocessedGrid> grids;
  for (int i = 0; i < 4; ++i) grids.push_back(random_grid(prng));
  const auto batch = predict_batch(m, grids);
  for (std::size_t i = 0; i < grids.size(); ++i) {
    const auto one = predict(m, grids[i]);
    EXPECT_EQ(one.label, batch[i].label);
    for (std::size_t c = 0; c < kNumClasses; ++c) EXPECT_NEAR(one.probs[c], batch[i].probs[c], 1e-12);
    EXPECT_EQ(predict(m, grids[i]).probs, one.probs);
  }
}

TEST(Features, LengthAndRange) {
  const Model m = build_supervised_cnn();
  Prng prng(3);
  const auto f = extract_features(m, random_grid(prng));
  ASSERT_EQ(f.size(), 26u);
  for (double v : f) {
    EXPECT_GT(v, -1.0);
    EXPECT_LT(v, 1.0);
  }
}

TEST(Autoencoder, CodeAndReconstructionShapes) {
  const Model m = build_conv_autoencoder();
  Prng prng(4);
  const PreprocessedGrid g = random_grid(prng);
  const auto code = encode(m, g);
  ASSERT_EQ(code.size(), 10u);
  for (double v : code) EXPECT_GE(v, 0.0);
  const PreprocessedGrid r = reconstruct(m, g);
  EXPECT_EQ(r.values.size(), kPmts);
  EXPECT_EQ(reconstruct_batch(m, std::vector<PreprocessedGrid>{g})[0], r);
}

TEST(KindChecks, WrongModelKind) {
  const Model cnn = build_supervised_cnn();
  const Model cae = build_conv_autoencoder();
  const PreprocessedGrid g;
  EXPECT_THROW(predict(cae, g), KindError);
  EXPECT_THROW(extract_features(cae, g), KindError);
  EXPECT_THROW(encode(cnn, g), KindError);
  EXPECT_THROW(reconstruct(cnn, g), KindError);
}

TEST(Backward, WholeNetworkMatchesFiniteDifferences) {
  Model m = build_supervised_cnn({InitScheme::GlorotUniform, 7});
  Prng prng(8);
  const PreprocessedGrid g = random_grid(prng);
  const Tensor4 x = to_tensor(g);
  const std::size_t label = 3;

  const Tensor4 probs = forward_train(m, x);
  const auto ce = cross_entropy_loss(probs.values(), label);
  const auto grads = backward(m, Tensor4(probs.shape(), ce.grad_logits), GradWrt::PreActivation);

  // probe a handful of weights in every parametrised layer
  for (std::size_t li = 0; li < m.layers.size(); ++li) {
    if (!m.layers[li].spec.has_params()) continue;
    auto& w = m.layers[li].state.weights.values();
    for (int k = 0; k < 5; ++k) {
      const std::size_t idx = prng.below(w.size());
      const double saved = w[idx];
      const double eps = 1e-5;
      w[idx] = saved + eps;
      const double up = cross_entropy_loss(forward(m, x).values(), label).loss;
      w[idx] = saved - eps;
      const double down = cross_entropy_loss(forward(m, x).values(), label).loss;
      w[idx] = saved;
      const double numeric = (up - down) / (2 * eps);
      const double analytic = grads[li].weights.values()[idx];
      EXPECT_LE(std::abs(numeric - analytic), 1e-6 * std::max({std::abs(numeric), std::abs(analytic), 1e-4}))
          << "layer " << li << " weight " << idx;
    }
  }
}

TEST(Serialization, RoundTripIsBitExact) {
  for (const Model& m : {build_supervised_cnn({InitScheme::GlorotUniform, 9}), build_conv_autoencoder()}) {
    const auto bytes = serialize_model(m);
    const Model back = deserialize_model(bytes);
    EXPECT_EQ(serialize_model(back), bytes);
    EXPECT_EQ(back.kind, m.kind);
    EXPECT_EQ(back.feature_layer, m.feature_layer);
    ASSERT_EQ(back.layers.size(), m.layers.size());
    for (std::size_t i = 0; i < m.layers.size(); ++i) {
      EXPECT_EQ(back.layers[i].spec, m.layers[i].spec);
      EXPECT_EQ(back.layers[i].state.weights, m.layers[i].state.weights);
      EXPECT_EQ(back.layers[i].state.bias, m.layers[i].state.bias);
    }
  }
}

TEST(Serialization, HeaderBytes) {
  const auto bytes = serialize_model(build_conv_autoencoder());
  ASSERT_GE(bytes.size(), 7u);
  EXPECT_EQ(std::string(bytes.begin(), bytes.begin() + 4), "NLNS");
  EXPECT_EQ(bytes[4], 1);  // version, little-endian u16
  EXPECT_EQ(bytes[5], 0);
  EXPECT_EQ(bytes[6], 2);  // kind: autoencoder
}

TEST(Serialization, CorruptInputIsFormatError) {
  auto bytes = serialize_model(build_supervised_cnn());
  auto truncated = bytes;
  truncated.resize(bytes.size() - 3);
  EXPECT_THROW(deserialize_model(truncated), FormatError);
  auto bad_magic = bytes;
  bad_magic[0] = 'X';
  EXPECT_THROW(deserialize_model(bad_magic), FormatError);
  auto bad_version = bytes;
  bad_version[4] = 9;
  EXPECT_THROW(deserialize_model(bad_version), FormatError);
  auto trailing = bytes;
  trailing.push_back(0);
  EXPECT_THROW(deserialize_model(trailing), FormatError);
}

TEST(Serialization, BaselineContainerIsKindError) {
  auto bytes = serialize_model(build_supervised_cnn());
  bytes[6] = 3;
  EXPECT_THROW(deserialize_model(bytes), KindError);
}
