#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace pmtnet {

/// Dense N x N row-major probability matrix.
struct AffinityMatrix {
  std::size_t n = 0;
  std::vector<double> p;

  double operator()(std::size_t i, std::size_t j) const noexcept { return p[i * n + j]; }
};

/// Distances below this are floored so duplicate points keep finite kernels.
inline constexpr double kDistanceFloor = 1e-12;
inline constexpr double kPerplexityTolerance = 1e-4;

/// Row i holds p(j | i): a Gaussian kernel over squared distances whose
/// bandwidth is bisected (64 steps, log-bandwidth) until 2^H(row) matches the
/// perplexity. Throws ConfigError unless 1 <= perplexity <= N - 1 and N >= 4.
AffinityMatrix conditional_probabilities(const std::vector<std::vector<double>>& x, double perplexity);

/// (P + P^T) / (2N) of a conditional matrix.
AffinityMatrix symmetrize(const AffinityMatrix& conditional);

/// conditional_probabilities followed by symmetrize.
AffinityMatrix conditional_affinities(const std::vector<std::vector<double>>& x, double perplexity);

/// Perplexity 2^H of row i, H in bits.
double row_perplexity(const AffinityMatrix& m, std::size_t i);

/// N points by `dims` coordinates, row-major.
struct Embedding {
  std::size_t n = 0;
  std::size_t dims = 2;
  std::vector<double> coords;

  double at(std::size_t i, std::size_t d) const noexcept { return coords[i * dims + d]; }
};

/// Student-t (one degree of freedom) joint affinities of an embedding.
AffinityMatrix low_dim_affinities(const Embedding& y);

/// Sum of p ln(p / q) over entries with p > 0; q is floored at 1e-12.
double kl_divergence(std::span<const double> p, std::span<const double> q);

/// dKL/dy_i = 4 sum_j (p_ij - q_ij)(y_i - y_j) / (1 + |y_i - y_j|^2), same layout as y.coords.
std::vector<double> kl_gradient(const AffinityMatrix& p, const Embedding& y);

struct TsneConfig {
  std::size_t dims = 2;
  std::size_t iterations = 1000;
  double learning_rate = 100.0;
  double momentum = 0.5;
  double final_momentum = 0.8;
  std::size_t momentum_switch = 250;
  double exaggeration = 4.0;
  std::size_t exaggeration_iters = 100;
  std::uint64_t seed = 1;
};

struct TsneResult {
  Embedding embedding;
  std::vector<double> kl_trace;  // KL(P || Q) after every iteration, unexaggerated P
};

/// Gradient descent with momentum from a N(0, 1e-4^2) start; P is multiplied by
/// the exaggeration factor for the first exaggeration_iters iterations.
TsneResult tsne_embed(const AffinityMatrix& p, const TsneConfig& cfg = {});

}  // namespace pmtnet
