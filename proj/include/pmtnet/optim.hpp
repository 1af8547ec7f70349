#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "pmtnet/models.hpp"

namespace pmtnet {

struct SgdConfig {
  double learning_rate = 0.01;
  double momentum = 0.9;  // classical (heavy-ball), in [0, 1)
  std::size_t batch_size = 64;
  std::size_t epochs = 10;
  std::uint64_t seed = 1;

  /// Throws ConfigError on an out-of-range field.
  void validate() const;

  /// Supervised CNN: lr 0.01, momentum 0.9, batch 64.
  static SgdConfig cnn_defaults();
  /// Autoencoder: lr 0.0005, momentum 0.9, batch 64.
  static SgdConfig cae_defaults();
};

enum class LossKind { CrossEntropy, SumSquaredError };

/// Momentum buffers, one per parameter tensor, zero-initialised.
struct Velocity {
  std::vector<std::vector<double>> weights;
  std::vector<std::vector<double>> bias;
};

Velocity make_velocity(const Model& model);

/// v <- momentum * v - learning_rate * g;  p <- p + v.
void sgd_step(std::span<double> params, std::span<const double> grads, std::span<double> velocity,
              const SgdConfig& cfg);
void sgd_step(Model& model, const std::vector<LayerGrads>& grads, Velocity& velocity, const SgdConfig& cfg);

/// Mean per-example loss and batch-mean gradients for one mini-batch.
struct BatchResult {
  double mean_loss = 0.0;
  std::vector<LayerGrads> grads;
};

/// Forward + backward on `inputs` (labels unused for SumSquaredError, whose
/// target is the input itself).
BatchResult batch_gradients(Model& model, std::span<const PreprocessedGrid> inputs, std::span<const EventLabel> labels,
                            LossKind loss);

/// One pass over the data: shuffle with `prng`, split into batches of
/// cfg.batch_size (the last may be short), one sgd_step per batch. Returns the
/// mean per-example loss. Throws DataError on empty data.
double train_epoch(Model& model, std::span<const PreprocessedGrid> inputs, std::span<const EventLabel> labels,
                   const SgdConfig& cfg, LossKind loss, Velocity& velocity, Prng& prng);

using EpochCallback = std::function<void(std::size_t epoch, double mean_loss)>;

/// cfg.epochs calls to train_epoch with a Prng seeded from cfg.seed. Returns the
/// per-epoch loss trace.
std::vector<double> train(Model& model, std::span<const PreprocessedGrid> inputs, std::span<const EventLabel> labels,
                          const SgdConfig& cfg, LossKind loss, const EpochCallback& on_epoch = {});

/// Mean per-example loss of a frozen model.
double dataset_loss(const Model& model, std::span<const PreprocessedGrid> inputs, std::span<const EventLabel> labels,
                    LossKind loss);

}  // namespace pmtnet
