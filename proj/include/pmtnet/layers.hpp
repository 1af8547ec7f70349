#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pmtnet/tensor.hpp"

namespace pmtnet {

enum class LayerKind : std::uint8_t { Conv = 0, MaxPool = 1, Dense = 2, TransposedConv = 3, Activation = 4 };
enum class Activation : std::uint8_t { None = 0, Tanh = 1, Relu = 2, Softmax = 3 };

std::string to_string(LayerKind kind);
std::string to_string(Activation act);

/// One row of an architecture table.
///
/// `in_channels`/`filters` are channel counts for Conv and TransposedConv and
/// unit counts for Dense. Pooling and standalone activations carry no weights
/// and preserve the channel count.
struct LayerSpec {
  LayerKind kind = LayerKind::Activation;
  Extent2 filter{1, 1};
  std::size_t in_channels = 1;
  std::size_t filters = 1;
  Extent2 stride{1, 1};
  Extent2 pad{0, 0};
  Activation activation = Activation::None;

  static LayerSpec conv(std::size_t in, std::size_t filters, Extent2 kernel, Extent2 pad, Activation act);
  static LayerSpec max_pool(Extent2 window = {2, 2}, Extent2 stride = {2, 2});
  static LayerSpec dense(std::size_t in_units, std::size_t out_units, Activation act);
  static LayerSpec transposed_conv(std::size_t in, std::size_t filters, Extent2 kernel, Extent2 stride,
                                   Activation act = Activation::None);
  static LayerSpec activation_only(Activation act);

  bool has_params() const noexcept;
  Window window() const noexcept { return {filter, stride, pad}; }
  /// Shape of the weight tensor: (filters, in_channels, kh, kw); Dense uses kh = kw = 1.
  Shape4 weight_shape() const;
  /// Output shape for a given input shape. Throws ShapeError on mismatch.
  Shape4 output_shape(const Shape4& in) const;

  friend bool operator==(const LayerSpec&, const LayerSpec&) = default;
};

/// Forward-pass intermediates kept for the backward pass.
struct LayerCache {
  Shape4 input_shape{};
  Tensor4 input;          // Dense and Activation only
  Tensor4 output;         // post-activation output
  Matrix lowered;         // Conv: im2col(input); TransposedConv: input as (in, n*h*w)
  std::vector<std::size_t> argmax;  // MaxPool: flat input index per output element
};

/// Trainable parameters plus the cache of the most recent forward pass.
struct LayerState {
  Tensor4 weights;
  std::vector<double> bias;
  std::optional<LayerCache> cache;

  std::size_t param_count() const noexcept { return weights.size() + bias.size(); }
};

struct LayerGrads {
  Tensor4 input;
  Tensor4 weights;
  std::vector<double> bias;
};

/// What the gradient handed to a backward call is taken with respect to.
/// PreActivation skips the activation derivative; the softmax + cross-entropy
/// head uses it since that loss hands back d/dlogits directly.
enum class GradWrt { Output, PreActivation };

/// Zero weights and biases shaped for `spec`.
LayerState make_layer_state(const LayerSpec& spec);
/// Uniform U(-a, a) weights with a = sqrt(6 / (fan_in + fan_out)); zero biases.
LayerState glorot_layer_state(const LayerSpec& spec, Prng& prng);

Tensor4 conv_forward(const Tensor4& x, LayerState& st, const LayerSpec& spec);
LayerGrads conv_backward(const Tensor4& grad_y, LayerState& st, const LayerSpec& spec,
                         GradWrt wrt = GradWrt::Output);

Tensor4 maxpool_forward(const Tensor4& x, LayerState& st, const LayerSpec& spec);
Tensor4 maxpool_backward(const Tensor4& grad_y, LayerState& st);

Tensor4 dense_forward(const Tensor4& x, LayerState& st, const LayerSpec& spec);
LayerGrads dense_backward(const Tensor4& grad_y, LayerState& st, const LayerSpec& spec,
                          GradWrt wrt = GradWrt::Output);

Tensor4 tconv_forward(const Tensor4& x, LayerState& st, const LayerSpec& spec);
LayerGrads tconv_backward(const Tensor4& grad_y, LayerState& st, const LayerSpec& spec,
                          GradWrt wrt = GradWrt::Output);

/// Dispatch on spec.kind; caches intermediates in `st`.
Tensor4 layer_forward(const Tensor4& x, LayerState& st, const LayerSpec& spec);
/// Dispatch on spec.kind; consumes and clears the cache. Throws StateError if
/// no forward pass has run.
LayerGrads layer_backward(const Tensor4& grad_y, LayerState& st, const LayerSpec& spec,
                          GradWrt wrt = GradWrt::Output);
/// Forward pass that leaves `st` untouched (inference).
Tensor4 layer_apply(const Tensor4& x, const LayerState& st, const LayerSpec& spec);

/// Numerically stable softmax: exp(z - max z) / sum.
std::vector<double> softmax(std::span<const double> z);

struct CrossEntropy {
  double loss = 0.0;
  std::vector<double> grad_logits;
};

inline constexpr double kCrossEntropyFloor = 1e-12;

/// -ln(probs[label] + 1e-12); gradient with respect to the pre-softmax logits
/// is probs - onehot(label). Throws LabelError if label is out of range.
CrossEntropy cross_entropy_loss(std::span<const double> probs, std::size_t label);

struct SquaredError {
  double loss = 0.0;
  Tensor4 grad;
};

/// Sum of squared differences and its gradient 2 (recon - target).
SquaredError sse_loss(const Tensor4& recon, const Tensor4& target);

}  // namespace pmtnet
