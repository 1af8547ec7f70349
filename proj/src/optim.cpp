#include "pmtnet/optim.hpp"

#include <cmath>
#include <numeric>

#include "pmtnet/errors.hpp"

namespace pmtnet {

namespace {

void check_loss_compat(const Model& model, std::span<const PreprocessedGrid> inputs,
                       std::span<const EventLabel> labels, LossKind loss) {
  if (inputs.empty()) throw DataError("empty dataset");
  const LayerSpec& head = model.layers.back().spec;
  if (loss == LossKind::CrossEntropy) {
    if (head.activation != Activation::Softmax) throw KindError("cross-entropy needs a softmax head");
    if (labels.size() != inputs.size()) throw DataError("labels and inputs differ in length");
  } else if (activation_shapes(model).back().per_item() != kPmts) {
    throw KindError("squared-error reconstruction needs an 8x24 output");
  }
}

constexpr std::size_t kEvalChunk = 256;

}  // namespace

void SgdConfig::validate() const {
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) throw ConfigError("learning_rate must be >= 0");
  if (!(momentum >= 0.0 && momentum < 1.0)) throw ConfigError("momentum must lie in [0, 1)");
  if (batch_size == 0) throw ConfigError("batch_size must be positive");
  if (epochs == 0) throw ConfigError("epochs must be positive");
}

SgdConfig SgdConfig::cnn_defaults() { return {0.01, 0.9, 64, 24, 1}; }

SgdConfig SgdConfig::cae_defaults() { return {0.0005, 0.9, 64, 30, 1}; }

Velocity make_velocity(const Model& model) {
  Velocity v;
  for (const auto& l : model.layers) {
    v.weights.emplace_back(l.state.weights.size(), 0.0);
    v.bias.emplace_back(l.state.bias.size(), 0.0);
  }
  return v;
}

void sgd_step(std::span<double> params, std::span<const double> grads, std::span<double> velocity,
              const SgdConfig& cfg) {
  if (params.size() != grads.size() || params.size() != velocity.size())
    throw ShapeError("sgd_step: parameter, gradient and velocity sizes differ");
  for (std::size_t i = 0; i < params.size(); ++i) {
    velocity[i] = cfg.momentum * velocity[i] - cfg.learning_rate * grads[i];
    params[i] += velocity[i];
  }
}

void sgd_step(Model& model, const std::vector<LayerGrads>& grads, Velocity& velocity, const SgdConfig& cfg) {
  if (grads.size() != model.layers.size() || velocity.weights.size() != model.layers.size())
    throw ShapeError("sgd_step: layer counts differ");
  for (std::size_t i = 0; i < model.layers.size(); ++i) {
    auto& st = model.layers[i].state;
    if (st.param_count() == 0) continue;
    sgd_step(st.weights.data(), grads[i].weights.data(), velocity.weights[i], cfg);
    sgd_step(st.bias, grads[i].bias, velocity.bias[i], cfg);
  }
}

BatchResult batch_gradients(Model& model, std::span<const PreprocessedGrid> inputs, std::span<const EventLabel> labels,
                            LossKind loss) {
  const Tensor4 x = to_tensor(inputs);
  const Tensor4 y = forward_train(model, x);
  const std::size_t n = inputs.size();
  const double inv = 1.0 / static_cast<double>(n);
  BatchResult out;
  Tensor4 grad(y.shape());
  GradWrt wrt = GradWrt::Output;
  if (loss == LossKind::CrossEntropy) {
    const std::size_t classes = y.shape().per_item();
    for (std::size_t i = 0; i < n; ++i) {
      const auto probs = y.data().subspan(i * classes, classes);
      const CrossEntropy ce = cross_entropy_loss(probs, index_of(labels[i]));
      out.mean_loss += ce.loss;
      for (std::size_t k = 0; k < classes; ++k) grad.values()[i * classes + k] = ce.grad_logits[k] * inv;
    }
    wrt = GradWrt::PreActivation;
  } else {
    SquaredError se = sse_loss(y, x);
    out.mean_loss = se.loss;
    for (double& g : se.grad.values()) g *= inv;
    grad = std::move(se.grad);
  }
  out.mean_loss *= inv;
  out.grads = backward(model, grad, wrt);
  return out;
}

double train_epoch(Model& model, std::span<const PreprocessedGrid> inputs, std::span<const EventLabel> labels,
                   const SgdConfig& cfg, LossKind loss, Velocity& velocity, Prng& prng) {
  cfg.validate();
  check_loss_compat(model, inputs, labels, loss);
  std::vector<std::size_t> order(inputs.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  prng.shuffle(order);

  std::vector<PreprocessedGrid> batch;
  std::vector<EventLabel> batch_labels;
  double total = 0.0;
  for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
    const std::size_t end = std::min(order.size(), start + cfg.batch_size);
    batch.clear();
    batch_labels.clear();
    for (std::size_t k = start; k < end; ++k) {
      batch.push_back(inputs[order[k]]);
      if (loss == LossKind::CrossEntropy) batch_labels.push_back(labels[order[k]]);
    }
    const BatchResult r = batch_gradients(model, batch, batch_labels, loss);
    total += r.mean_loss * static_cast<double>(end - start);
    sgd_step(model, r.grads, velocity, cfg);
  }
  const double mean = total / static_cast<double>(inputs.size());
  if (!std::isfinite(mean)) throw DomainError("training diverged: non-finite loss");
  return mean;
}

std::vector<double> train(Model& model, std::span<const PreprocessedGrid> inputs, std::span<const EventLabel> labels,
                          const SgdConfig& cfg, LossKind loss, const EpochCallback& on_epoch) {
  cfg.validate();
  Velocity velocity = make_velocity(model);
  Prng prng(cfg.seed);
  std::vector<double> trace;
  for (std::size_t e = 0; e < cfg.epochs; ++e) {
    trace.push_back(train_epoch(model, inputs, labels, cfg, loss, velocity, prng));
    if (on_epoch) on_epoch(e + 1, trace.back());
  }
  return trace;
}

double dataset_loss(const Model& model, std::span<const PreprocessedGrid> inputs, std::span<const EventLabel> labels,
                    LossKind loss) {
  check_loss_compat(model, inputs, labels, loss);
  double total = 0.0;
  for (std::size_t start = 0; start < inputs.size(); start += kEvalChunk) {
    const std::size_t len = std::min(kEvalChunk, inputs.size() - start);
    const auto chunk = inputs.subspan(start, len);
    const Tensor4 x = to_tensor(chunk);
    const Tensor4 y = forward(model, x);
    if (loss == LossKind::CrossEntropy) {
      const std::size_t classes = y.shape().per_item();
      for (std::size_t i = 0; i < len; ++i)
        total += cross_entropy_loss(y.data().subspan(i * classes, classes), index_of(labels[start + i])).loss;
    } else {
      total += sse_loss(y, x).loss;
    }
  }
  return total / static_cast<double>(inputs.size());
}

}  // namespace pmtnet
