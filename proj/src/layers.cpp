#include "pmtnet/layers.hpp"

#include <algorithm>
#include <cmath>

#include "pmtnet/errors.hpp"

namespace pmtnet {

namespace {

Matrix weights_as_matrix(const Tensor4& w) {
  Matrix m(w.shape().n, w.shape().per_item());
  std::copy(w.values().begin(), w.values().end(), m.data.begin());
  return m;
}

void apply_activation(Tensor4& y, Activation act) {
  auto& v = y.values();
  switch (act) {
    case Activation::None:
      return;
    case Activation::Tanh:
      for (double& e : v) e = std::tanh(e);
      return;
    case Activation::Relu:
      for (double& e : v) e = e > 0.0 ? e : 0.0;
      return;
    case Activation::Softmax: {
      const std::size_t per = y.shape().per_item();
      for (std::size_t n = 0; n < y.shape().n; ++n) {
        std::span<double> row(v.data() + n * per, per);
        const auto p = softmax(row);
        std::copy(p.begin(), p.end(), row.begin());
      }
      return;
    }
  }
}

// Gradient with respect to the pre-activation, given the gradient with respect
// to the activation output `y`.
Tensor4 activation_backward(const Tensor4& grad_y, const Tensor4& y, Activation act) {
  Tensor4 g = grad_y;
  auto& gv = g.values();
  const auto& yv = y.values();
  switch (act) {
    case Activation::None:
      break;
    case Activation::Tanh:
      for (std::size_t i = 0; i < gv.size(); ++i) gv[i] *= 1.0 - yv[i] * yv[i];
      break;
    case Activation::Relu:
      for (std::size_t i = 0; i < gv.size(); ++i)
        if (!(yv[i] > 0.0)) gv[i] = 0.0;
      break;
    case Activation::Softmax: {
      const std::size_t per = y.shape().per_item();
      for (std::size_t n = 0; n < y.shape().n; ++n) {
        const std::size_t off = n * per;
        double dot = 0.0;
        for (std::size_t k = 0; k < per; ++k) dot += gv[off + k] * yv[off + k];
        for (std::size_t k = 0; k < per; ++k) gv[off + k] = yv[off + k] * (gv[off + k] - dot);
      }
      break;
    }
  }
  return g;
}

void require_input(const Shape4& got, const LayerSpec& spec) {
  (void)spec.output_shape(got);  // throws ShapeError on mismatch
}

LayerCache& require_cache(LayerState& st) {
  if (!st.cache) throw StateError("backward called without a preceding forward pass");
  return *st.cache;
}

void require_grad_shape(const Tensor4& grad_y, const LayerCache& cache) {
  if (grad_y.shape() != cache.output.shape()) throw ShapeError("gradient shape differs from forward output shape");
}

Tensor4 pre_activation_grad(const Tensor4& grad_y, const LayerCache& cache, Activation act, GradWrt wrt) {
  require_grad_shape(grad_y, cache);
  return wrt == GradWrt::PreActivation ? grad_y : activation_backward(grad_y, cache.output, act);
}

// ---- convolution ----

Tensor4 conv_impl(const Tensor4& x, const LayerState& st, const LayerSpec& spec, LayerCache* cache) {
  const Shape4 out = spec.output_shape(x.shape());
  Matrix cols = im2col(x, spec.window());
  const Matrix z = matmul(weights_as_matrix(st.weights), cols);
  const std::size_t positions = out.h * out.w;
  Tensor4 y(out);
  auto& yv = y.values();
  for (std::size_t n = 0; n < out.n; ++n)
    for (std::size_t f = 0; f < out.c; ++f) {
      const double* src = &z.data[f * z.cols + n * positions];
      double* dst = &yv[(n * out.c + f) * positions];
      for (std::size_t p = 0; p < positions; ++p) dst[p] = src[p] + st.bias[f];
    }
  apply_activation(y, spec.activation);
  if (cache) {
    cache->input_shape = x.shape();
    cache->lowered = std::move(cols);
    cache->output = y;
  }
  return y;
}

// ---- max pooling ----

Tensor4 pool_impl(const Tensor4& x, const LayerSpec& spec, LayerCache* cache) {
  const Shape4 out = spec.output_shape(x.shape());
  Tensor4 y(out);
  std::vector<std::size_t> argmax(out.size());
  for (std::size_t n = 0; n < out.n; ++n)
    for (std::size_t c = 0; c < out.c; ++c)
      for (std::size_t i = 0; i < out.h; ++i)
        for (std::size_t j = 0; j < out.w; ++j) {
          std::size_t best = x.index(n, c, i * spec.stride.h, j * spec.stride.w);
          for (std::size_t u = 0; u < spec.filter.h; ++u)
            for (std::size_t v = 0; v < spec.filter.w; ++v) {
              const std::size_t k = x.index(n, c, i * spec.stride.h + u, j * spec.stride.w + v);
              // strict comparison: the first maximum in row-major order wins
              if (x.values()[k] > x.values()[best]) best = k;
            }
          const std::size_t o = y.index(n, c, i, j);
          y.values()[o] = x.values()[best];
          argmax[o] = best;
        }
  if (cache) {
    cache->input_shape = x.shape();
    cache->argmax = std::move(argmax);
    cache->output = y;
  }
  return y;
}

// ---- fully connected ----

Tensor4 dense_impl(const Tensor4& x, const LayerState& st, const LayerSpec& spec, LayerCache* cache) {
  const Shape4 out = spec.output_shape(x.shape());
  Matrix xm(x.shape().n, x.shape().per_item());
  std::copy(x.values().begin(), x.values().end(), xm.data.begin());
  const Matrix z = matmul_a_bt(xm, weights_as_matrix(st.weights));
  Tensor4 y(out);
  for (std::size_t n = 0; n < out.n; ++n)
    for (std::size_t k = 0; k < out.c; ++k) y.values()[n * out.c + k] = z(n, k) + st.bias[k];
  apply_activation(y, spec.activation);
  if (cache) {
    cache->input_shape = x.shape();
    cache->input = x;
    cache->output = y;
  }
  return y;
}

// ---- transposed convolution ----

// (out*kh*kw) x in, entry ((o*kh + u)*kw + v, i) = W(o, i, u, v).
Matrix tconv_weight_matrix(const Tensor4& w) {
  const Shape4& s = w.shape();
  Matrix m(s.n * s.h * s.w, s.c);
  for (std::size_t o = 0; o < s.n; ++o)
    for (std::size_t i = 0; i < s.c; ++i)
      for (std::size_t u = 0; u < s.h; ++u)
        for (std::size_t v = 0; v < s.w; ++v) m((o * s.h + u) * s.w + v, i) = w(o, i, u, v);
  return m;
}

// (n, c, h, w) -> c x (n*h*w)
Matrix channels_major(const Tensor4& x) {
  const Shape4& s = x.shape();
  const std::size_t hw = s.h * s.w;
  Matrix m(s.c, s.n * hw);
  for (std::size_t n = 0; n < s.n; ++n)
    for (std::size_t c = 0; c < s.c; ++c)
      std::copy_n(&x.values()[(n * s.c + c) * hw], hw, &m.data[c * m.cols + n * hw]);
  return m;
}

Tensor4 from_channels_major(const Matrix& m, Shape4 shape) {
  Tensor4 x(shape);
  const std::size_t hw = shape.h * shape.w;
  for (std::size_t n = 0; n < shape.n; ++n)
    for (std::size_t c = 0; c < shape.c; ++c)
      std::copy_n(&m.data[c * m.cols + n * hw], hw, &x.values()[(n * shape.c + c) * hw]);
  return x;
}

Tensor4 tconv_impl(const Tensor4& x, const LayerState& st, const LayerSpec& spec, LayerCache* cache) {
  const Shape4 out = spec.output_shape(x.shape());
  Matrix xm = channels_major(x);
  const Matrix cols = matmul(tconv_weight_matrix(st.weights), xm);
  Tensor4 y = col2im(cols, out, spec.window());
  const std::size_t hw = out.h * out.w;
  for (std::size_t n = 0; n < out.n; ++n)
    for (std::size_t o = 0; o < out.c; ++o) {
      double* dst = &y.values()[(n * out.c + o) * hw];
      for (std::size_t p = 0; p < hw; ++p) dst[p] += st.bias[o];
    }
  apply_activation(y, spec.activation);
  if (cache) {
    cache->input_shape = x.shape();
    cache->lowered = std::move(xm);
    cache->output = y;
  }
  return y;
}

Tensor4 activation_impl(const Tensor4& x, const LayerSpec& spec, LayerCache* cache) {
  Tensor4 y = x;
  apply_activation(y, spec.activation);
  if (cache) {
    cache->input_shape = x.shape();
    cache->output = y;
  }
  return y;
}

}  // namespace

std::string to_string(LayerKind kind) {
  switch (kind) {
    case LayerKind::Conv: return "conv";
    case LayerKind::MaxPool: return "pool";
    case LayerKind::Dense: return "fc";
    case LayerKind::TransposedConv: return "deconv";
    case LayerKind::Activation: return "activation";
  }
  return "?";
}

std::string to_string(Activation act) {
  switch (act) {
    case Activation::None: return "none";
    case Activation::Tanh: return "tanh";
    case Activation::Relu: return "relu";
    case Activation::Softmax: return "softmax";
  }
  return "?";
}

LayerSpec LayerSpec::conv(std::size_t in, std::size_t filters, Extent2 kernel, Extent2 pad, Activation act) {
  return {LayerKind::Conv, kernel, in, filters, {1, 1}, pad, act};
}

LayerSpec LayerSpec::max_pool(Extent2 window, Extent2 stride) {
  return {LayerKind::MaxPool, window, 1, 1, stride, {0, 0}, Activation::None};
}

LayerSpec LayerSpec::dense(std::size_t in_units, std::size_t out_units, Activation act) {
  return {LayerKind::Dense, {1, 1}, in_units, out_units, {1, 1}, {0, 0}, act};
}

LayerSpec LayerSpec::transposed_conv(std::size_t in, std::size_t filters, Extent2 kernel, Extent2 stride,
                                     Activation act) {
  return {LayerKind::TransposedConv, kernel, in, filters, stride, {0, 0}, act};
}

LayerSpec LayerSpec::activation_only(Activation act) {
  return {LayerKind::Activation, {1, 1}, 1, 1, {1, 1}, {0, 0}, act};
}

bool LayerSpec::has_params() const noexcept {
  return kind == LayerKind::Conv || kind == LayerKind::Dense || kind == LayerKind::TransposedConv;
}

Shape4 LayerSpec::weight_shape() const {
  switch (kind) {
    case LayerKind::Conv:
    case LayerKind::TransposedConv:
      return {filters, in_channels, filter.h, filter.w};
    case LayerKind::Dense:
      return {filters, in_channels, 1, 1};
    default:
      throw ShapeError(to_string(kind) + " layers have no weights");
  }
}

Shape4 LayerSpec::output_shape(const Shape4& in) const {
  if (!in.valid()) throw ShapeError("invalid input shape");
  switch (kind) {
    case LayerKind::Conv: {
      if (in.c != in_channels)
        throw ShapeError("conv expects " + std::to_string(in_channels) + " channels, got " + std::to_string(in.c));
      const Extent2 e = window_output({in.h, in.w}, window());
      return {in.n, filters, e.h, e.w};
    }
    case LayerKind::MaxPool: {
      if (in.h < filter.h || in.w < filter.w) throw ShapeError("pooling window larger than input");
      return {in.n, in.c, (in.h - filter.h) / stride.h + 1, (in.w - filter.w) / stride.w + 1};
    }
    case LayerKind::Dense:
      if (in.per_item() != in_channels)
        throw ShapeError("fc expects " + std::to_string(in_channels) + " inputs, got " +
                         std::to_string(in.per_item()));
      return {in.n, filters, 1, 1};
    case LayerKind::TransposedConv: {
      if (in.c != in_channels)
        throw ShapeError("deconv expects " + std::to_string(in_channels) + " channels, got " +
                         std::to_string(in.c));
      const std::size_t h = (in.h - 1) * stride.h + filter.h;
      const std::size_t w = (in.w - 1) * stride.w + filter.w;
      if (h <= 2 * pad.h || w <= 2 * pad.w) throw ShapeError("deconv padding consumes the whole output");
      return {in.n, filters, h - 2 * pad.h, w - 2 * pad.w};
    }
    case LayerKind::Activation:
      return in;
  }
  throw ShapeError("unknown layer kind");
}

LayerState make_layer_state(const LayerSpec& spec) {
  LayerState st;
  if (spec.has_params()) {
    st.weights = Tensor4(spec.weight_shape());
    st.bias.assign(spec.filters, 0.0);
  }
  return st;
}

LayerState glorot_layer_state(const LayerSpec& spec, Prng& prng) {
  LayerState st = make_layer_state(spec);
  if (!spec.has_params()) return st;
  const Shape4 ws = spec.weight_shape();
  const double fan_in = static_cast<double>(ws.c * ws.h * ws.w);
  const double fan_out = static_cast<double>(ws.n * ws.h * ws.w);
  const double a = std::sqrt(6.0 / (fan_in + fan_out));
  for (double& v : st.weights.values()) v = prng.uniform(-a, a);
  return st;
}

Tensor4 conv_forward(const Tensor4& x, LayerState& st, const LayerSpec& spec) {
  LayerCache cache;
  Tensor4 y = conv_impl(x, st, spec, &cache);
  st.cache = std::move(cache);
  return y;
}

LayerGrads conv_backward(const Tensor4& grad_y, LayerState& st, const LayerSpec& spec, GradWrt wrt) {
  LayerCache& cache = require_cache(st);
  const Tensor4 gz = pre_activation_grad(grad_y, cache, spec.activation, wrt);
  const Shape4 out = gz.shape();
  const std::size_t positions = out.h * out.w;
  Matrix gm(out.c, out.n * positions);
  for (std::size_t n = 0; n < out.n; ++n)
    for (std::size_t f = 0; f < out.c; ++f)
      std::copy_n(&gz.values()[(n * out.c + f) * positions], positions, &gm.data[f * gm.cols + n * positions]);

  LayerGrads g;
  const Matrix gw = matmul_a_bt(gm, cache.lowered);
  g.weights = Tensor4(st.weights.shape(), gw.data);
  g.bias.assign(out.c, 0.0);
  for (std::size_t f = 0; f < out.c; ++f)
    for (std::size_t k = 0; k < gm.cols; ++k) g.bias[f] += gm(f, k);
  const Matrix gcols = matmul_at_b(weights_as_matrix(st.weights), gm);
  g.input = col2im(gcols, cache.input_shape, spec.window());
  st.cache.reset();
  return g;
}

Tensor4 maxpool_forward(const Tensor4& x, LayerState& st, const LayerSpec& spec) {
  LayerCache cache;
  Tensor4 y = pool_impl(x, spec, &cache);
  st.cache = std::move(cache);
  return y;
}

Tensor4 maxpool_backward(const Tensor4& grad_y, LayerState& st) {
  LayerCache& cache = require_cache(st);
  require_grad_shape(grad_y, cache);
  Tensor4 gx(cache.input_shape);
  for (std::size_t k = 0; k < grad_y.size(); ++k) gx.values()[cache.argmax[k]] += grad_y.values()[k];
  st.cache.reset();
  return gx;
}

Tensor4 dense_forward(const Tensor4& x, LayerState& st, const LayerSpec& spec) {
  LayerCache cache;
  Tensor4 y = dense_impl(x, st, spec, &cache);
  st.cache = std::move(cache);
  return y;
}

LayerGrads dense_backward(const Tensor4& grad_y, LayerState& st, const LayerSpec& spec, GradWrt wrt) {
  LayerCache& cache = require_cache(st);
  const Tensor4 gz = pre_activation_grad(grad_y, cache, spec.activation, wrt);
  const std::size_t n = gz.shape().n;
  Matrix gm(n, spec.filters);
  std::copy(gz.values().begin(), gz.values().end(), gm.data.begin());
  Matrix xm(n, spec.in_channels);
  std::copy(cache.input.values().begin(), cache.input.values().end(), xm.data.begin());

  LayerGrads g;
  g.input = Tensor4(cache.input_shape, matmul(gm, weights_as_matrix(st.weights)).data);
  g.weights = Tensor4(st.weights.shape(), matmul_at_b(gm, xm).data);
  g.bias.assign(spec.filters, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < spec.filters; ++k) g.bias[k] += gm(i, k);
  st.cache.reset();
  return g;
}

Tensor4 tconv_forward(const Tensor4& x, LayerState& st, const LayerSpec& spec) {
  LayerCache cache;
  Tensor4 y = tconv_impl(x, st, spec, &cache);
  st.cache = std::move(cache);
  return y;
}

LayerGrads tconv_backward(const Tensor4& grad_y, LayerState& st, const LayerSpec& spec, GradWrt wrt) {
  LayerCache& cache = require_cache(st);
  const Tensor4 gz = pre_activation_grad(grad_y, cache, spec.activation, wrt);
  const Matrix gcols = im2col(gz, spec.window());
  const Matrix wt = tconv_weight_matrix(st.weights);

  LayerGrads g;
  g.input = from_channels_major(matmul_at_b(wt, gcols), cache.input_shape);
  const Matrix gwt = matmul_a_bt(gcols, cache.lowered);
  const Shape4 ws = st.weights.shape();
  g.weights = Tensor4(ws);
  for (std::size_t o = 0; o < ws.n; ++o)
    for (std::size_t i = 0; i < ws.c; ++i)
      for (std::size_t u = 0; u < ws.h; ++u)
        for (std::size_t v = 0; v < ws.w; ++v) g.weights(o, i, u, v) = gwt((o * ws.h + u) * ws.w + v, i);
  const Shape4 out = gz.shape();
  const std::size_t hw = out.h * out.w;
  g.bias.assign(out.c, 0.0);
  for (std::size_t n = 0; n < out.n; ++n)
    for (std::size_t o = 0; o < out.c; ++o)
      for (std::size_t p = 0; p < hw; ++p) g.bias[o] += gz.values()[(n * out.c + o) * hw + p];
  st.cache.reset();
  return g;
}

Tensor4 layer_forward(const Tensor4& x, LayerState& st, const LayerSpec& spec) {
  switch (spec.kind) {
    case LayerKind::Conv: return conv_forward(x, st, spec);
    case LayerKind::MaxPool: return maxpool_forward(x, st, spec);
    case LayerKind::Dense: return dense_forward(x, st, spec);
    case LayerKind::TransposedConv: return tconv_forward(x, st, spec);
    case LayerKind::Activation: {
      LayerCache cache;
      Tensor4 y = activation_impl(x, spec, &cache);
      st.cache = std::move(cache);
      return y;
    }
  }
  throw ShapeError("unknown layer kind");
}

LayerGrads layer_backward(const Tensor4& grad_y, LayerState& st, const LayerSpec& spec, GradWrt wrt) {
  switch (spec.kind) {
    case LayerKind::Conv: return conv_backward(grad_y, st, spec, wrt);
    case LayerKind::MaxPool: {
      LayerGrads g;
      g.input = maxpool_backward(grad_y, st);
      return g;
    }
    case LayerKind::Dense: return dense_backward(grad_y, st, spec, wrt);
    case LayerKind::TransposedConv: return tconv_backward(grad_y, st, spec, wrt);
    case LayerKind::Activation: {
      LayerCache& cache = require_cache(st);
      LayerGrads g;
      g.input = pre_activation_grad(grad_y, cache, spec.activation, wrt);
      st.cache.reset();
      return g;
    }
  }
  throw ShapeError("unknown layer kind");
}

Tensor4 layer_apply(const Tensor4& x, const LayerState& st, const LayerSpec& spec) {
  switch (spec.kind) {
    case LayerKind::Conv: return conv_impl(x, st, spec, nullptr);
    case LayerKind::MaxPool: return pool_impl(x, spec, nullptr);
    case LayerKind::Dense: return dense_impl(x, st, spec, nullptr);
    case LayerKind::TransposedConv: return tconv_impl(x, st, spec, nullptr);
    case LayerKind::Activation: return activation_impl(x, spec, nullptr);
  }
  throw ShapeError("unknown layer kind");
}

std::vector<double> softmax(std::span<const double> z) {
  std::vector<double> out(z.size());
  if (z.empty()) return out;
  const double m = *std::max_element(z.begin(), z.end());
  double sum = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    out[i] = std::exp(z[i] - m);
    sum += out[i];
  }
  for (double& v : out) v /= sum;
  return out;
}

CrossEntropy cross_entropy_loss(std::span<const double> probs, std::size_t label) {
  if (label >= probs.size())
    throw LabelError("label " + std::to_string(label) + " out of range for " + std::to_string(probs.size()) +
                     " classes");
  CrossEntropy ce;
  ce.loss = -std::log(probs[label] + kCrossEntropyFloor);
  ce.grad_logits.assign(probs.begin(), probs.end());
  ce.grad_logits[label] -= 1.0;
  return ce;
}

SquaredError sse_loss(const Tensor4& recon, const Tensor4& target) {
  if (recon.shape() != target.shape()) throw ShapeError("sse_loss: shapes differ");
  SquaredError out;
  out.grad = Tensor4(recon.shape());
  for (std::size_t i = 0; i < recon.size(); ++i) {
    const double d = recon.values()[i] - target.values()[i];
    out.loss += d * d;
    out.grad.values()[i] = 2.0 * d;
  }
  return out;
}

}  // namespace pmtnet
