#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "pmtnet/event.hpp"
#include "pmtnet/layers.hpp"

namespace pmtnet {

/// Kind tag shared by every model container ("NLNS") file.
enum class ModelKind : std::uint8_t { SupervisedCnn = 1, ConvAutoencoder = 2, Knn = 3, Svm = 4 };

std::string to_string(ModelKind kind);

struct Layer {
  LayerSpec spec;
  LayerState state;
};

/// Ordered stack of layers over a fixed per-item input shape.
struct Model {
  ModelKind kind = ModelKind::SupervisedCnn;
  Shape4 input_shape{1, 1, kRings, kColumns};  // n is ignored
  std::vector<Layer> layers;
  /// Index of the layer whose output is the learned representation: the
  /// 26-unit fc for the CNN, the 10-unit bottleneck for the autoencoder.
  std::size_t feature_layer = 0;

  std::size_t param_count() const noexcept;
};

enum class InitScheme : std::uint8_t { GlorotUniform = 0 };

/// Weight initialisation: U(-a, a), a = sqrt(6 / (fan_in + fan_out)); biases zero.
struct InitConfig {
  InitScheme scheme = InitScheme::GlorotUniform;
  std::uint64_t seed = 1;
};

/// Assembles a model from explicit layer specs, checking that every layer
/// accepts the previous layer's output. Throws BuildError otherwise.
Model make_model(ModelKind kind, Shape4 input_shape, const std::vector<LayerSpec>& specs, std::size_t feature_layer,
                 const InitConfig& init);

/// conv 3x3x71 tanh, pool 2x2, conv 2x2x88 tanh, pool 2x2, fc 26 tanh, fc 5 softmax.
/// Convolutions are valid (unpadded), giving (71,6,22) (71,3,11) (88,2,10) (88,1,5) 26 5.
Model build_supervised_cnn(const InitConfig& init = {});

/// conv 5x5x16 pad 2 relu, pool, conv 3x3x16 pad (1,0) relu, pool, fc 10 relu,
/// deconv 2x4x16 s2, deconv 2x5x16 s2, deconv 2x4x1 s2 (all linear).
/// The 10-unit bottleneck feeds the decoder as a (10,1,1) map.
Model build_conv_autoencoder(const InitConfig& init = {});

/// Output shape of every layer for a single (1, c, h, w) input.
std::vector<Shape4> activation_shapes(const Model& model);

/// Inference through layers [0, upto]. Leaves the model untouched.
Tensor4 forward(const Model& model, const Tensor4& x, std::size_t upto);
Tensor4 forward(const Model& model, const Tensor4& x);

/// Forward pass that caches intermediates for backward().
Tensor4 forward_train(Model& model, const Tensor4& x);
/// Back-propagates `grad_out` (taken with respect to the last layer's output,
/// or its pre-activation when wrt == PreActivation) and returns per-layer
/// gradients. Consumes the caches written by forward_train.
std::vector<LayerGrads> backward(Model& model, const Tensor4& grad_out, GradWrt wrt = GradWrt::Output);

/// Packs grids into an (n, 1, 8, 24) tensor.
Tensor4 to_tensor(std::span<const PreprocessedGrid> grids);
Tensor4 to_tensor(const PreprocessedGrid& grid);

struct Prediction {
  EventLabel label = EventLabel::Muon;
  std::array<double, kNumClasses> probs{};
};

/// Throws KindError unless `model` is a SupervisedCnn. Ties go to the lowest index.
Prediction predict(const Model& model, const PreprocessedGrid& grid);
std::vector<Prediction> predict_batch(const Model& model, std::span<const PreprocessedGrid> grids);

/// The 26 tanh activations of the penultimate fc layer.
std::vector<double> extract_features(const Model& model, const PreprocessedGrid& grid);
std::vector<std::vector<double>> extract_features_batch(const Model& model, std::span<const PreprocessedGrid> grids);

/// The 10-unit ReLU bottleneck code. Throws KindError unless ConvAutoencoder.
std::vector<double> encode(const Model& model, const PreprocessedGrid& grid);
std::vector<std::vector<double>> encode_batch(const Model& model, std::span<const PreprocessedGrid> grids);

/// Decoder output reshaped to 8 x 24 (linear, not clamped).
PreprocessedGrid reconstruct(const Model& model, const PreprocessedGrid& grid);
std::vector<PreprocessedGrid> reconstruct_batch(const Model& model, std::span<const PreprocessedGrid> grids);

/// Container format version written by save_model.
inline constexpr std::uint16_t kModelFormatVersion = 1;

std::vector<std::uint8_t> serialize_model(const Model& model);
/// Throws FormatError on malformed bytes and KindError on a baseline container.
Model deserialize_model(std::span<const std::uint8_t> bytes);
void save_model(const Model& model, const std::filesystem::path& path);
Model load_model(const std::filesystem::path& path);

}  // namespace pmtnet
