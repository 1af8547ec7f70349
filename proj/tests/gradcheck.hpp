#pragma once

// Finite-difference checks of layer backward passes. The scalar probed is
// sum(r * y) for a fixed random r, so dL/dy = r.

#include <algorithm>
#include <numeric>

#include "oracles.hpp"
#include "pmtnet/layers.hpp"

namespace gradcheck {

using namespace pmtnet;

struct Errors {
  double input = 0.0;
  double weights = 0.0;
  double bias = 0.0;

  double worst() const { return std::max({input, weights, bias}); }
};

inline double probe(const Tensor4& y, const Tensor4& r) { return oracle::dot(y.values(), r.values()); }

inline Errors check_layer(const LayerSpec& spec, LayerState st, Tensor4 x, Prng& prng) {
  const Tensor4 y0 = layer_apply(x, st, spec);
  const Tensor4 r = oracle::random_tensor(y0.shape(), prng);

  LayerState work = st;
  layer_forward(x, work, spec);
  const LayerGrads g = layer_backward(r, work, spec);

  auto f = [&] { return probe(layer_apply(x, st, spec), r); };
  Errors e;
  e.input = oracle::max_relative_error(g.input.values(), oracle::numeric_gradient(x.values(), f));
  if (spec.has_params()) {
    e.weights = oracle::max_relative_error(g.weights.values(), oracle::numeric_gradient(st.weights.values(), f));
    e.bias = oracle::max_relative_error(g.bias, oracle::numeric_gradient(st.bias, f));
  }
  return e;
}

/// Dense layer with a softmax head under cross-entropy; backward takes the
/// loss gradient with respect to the logits.
inline Errors check_softmax_ce(LayerState st, const LayerSpec& spec, Tensor4 x, std::size_t label) {
  LayerState work = st;
  const Tensor4 probs = layer_forward(x, work, spec);
  const auto ce = cross_entropy_loss(probs.values(), label);
  const LayerGrads g = layer_backward(Tensor4(probs.shape(), ce.grad_logits), work, spec, GradWrt::PreActivation);

  auto f = [&] { return cross_entropy_loss(layer_apply(x, st, spec).values(), label).loss; };
  Errors e;
  e.input = oracle::max_relative_error(g.input.values(), oracle::numeric_gradient(x.values(), f));
  e.weights = oracle::max_relative_error(g.weights.values(), oracle::numeric_gradient(st.weights.values(), f));
  e.bias = oracle::max_relative_error(g.bias, oracle::numeric_gradient(st.bias, f));
  return e;
}

/// Gradient of the SSE loss with respect to the reconstruction. Central
/// differences are exact on a quadratic, so a wide step only reduces roundoff.
inline double check_sse(Tensor4 recon, const Tensor4& target) {
  const auto analytic = sse_loss(recon, target).grad;
  auto f = [&] { return sse_loss(recon, target).loss; };
  return oracle::max_relative_error(analytic.values(), oracle::numeric_gradient(recon.values(), f, 1e-2));
}

inline std::size_t pick(Prng& prng, std::size_t lo, std::size_t hi) { return lo + prng.below(hi - lo + 1); }

inline LayerState random_state(const LayerSpec& spec, Prng& prng) {
  LayerState st = make_layer_state(spec);
  for (double& v : st.weights.values()) v = prng.uniform(-0.5, 0.5);
  for (double& v : st.bias) v = prng.uniform(-0.2, 0.2);
  return st;
}

// Random instances of each layer kind.

struct Instance {
  LayerSpec spec;
  LayerState state;
  Tensor4 x;
};

inline Instance conv_instance(Prng& prng, Activation act) {
  for (;;) {
    const std::size_t c = pick(prng, 1, 3), f = pick(prng, 1, 3);
    const Extent2 k{pick(prng, 1, 3), pick(prng, 1, 3)};
    const Extent2 pad{pick(prng, 0, 1), pick(prng, 0, 1)};
    const LayerSpec spec = LayerSpec::conv(c, f, k, pad, act);
    Instance in{spec, random_state(spec, prng), oracle::random_tensor({2, c, pick(prng, 3, 5), pick(prng, 3, 6)}, prng)};
    if (act != Activation::Relu) return in;
    // keep every pre-activation away from the ReLU kink
    LayerSpec linear = spec;
    linear.activation = Activation::None;
    const Tensor4 z = layer_apply(in.x, in.state, linear);
    if (std::all_of(z.values().begin(), z.values().end(), [](double v) { return std::abs(v) > 1e-3; })) return in;
  }
}

/// Values are a shuffled ladder with gaps of 0.1, so no window has a near-tie.
inline Instance pool_instance(Prng& prng) {
  const Shape4 s{2, pick(prng, 1, 3), pick(prng, 2, 6), pick(prng, 2, 7)};
  std::vector<double> v(s.size());
  std::iota(v.begin(), v.end(), 0.0);
  prng.shuffle(v);
  for (double& e : v) e = 0.1 * e - 1.0;
  return {LayerSpec::max_pool(), {}, Tensor4(s, std::move(v))};
}

inline Instance dense_instance(Prng& prng, Activation act) {
  const std::size_t in = pick(prng, 3, 8), out = pick(prng, 2, 6);
  const LayerSpec spec = LayerSpec::dense(in, out, act);
  return {spec, random_state(spec, prng), oracle::random_tensor({3, in, 1, 1}, prng)};
}

inline Instance tconv_instance(Prng& prng) {
  const std::size_t c = pick(prng, 1, 3), f = pick(prng, 1, 3);
  const LayerSpec spec = LayerSpec::transposed_conv(c, f, {2, pick(prng, 2, 5)}, {2, 2});
  return {spec, random_state(spec, prng), oracle::random_tensor({2, c, pick(prng, 1, 3), pick(prng, 1, 3)}, prng)};
}

}  // namespace gradcheck
