#include "pmtnet/tsne.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "pmtnet/errors.hpp"
#include "pmtnet/tensor.hpp"

namespace pmtnet {

namespace {

constexpr double kProbabilityFloor = 1e-12;
constexpr int kBisectionSteps = 64;

// Row of conditional probabilities for bandwidth exp(log_beta); returns the
// entropy in bits. `d` holds squared distances with d[self] ignored.
double fill_row(std::span<const double> d, std::size_t self, double log_beta, std::span<double> out) {
  const double beta = std::exp(log_beta);
  double dmin = std::numeric_limits<double>::max();
  for (std::size_t j = 0; j < d.size(); ++j)
    if (j != self) dmin = std::min(dmin, d[j]);
  double sum = 0.0, weighted = 0.0;
  for (std::size_t j = 0; j < d.size(); ++j) {
    if (j == self) {
      out[j] = 0.0;
      continue;
    }
    const double shifted = d[j] - dmin;
    out[j] = std::exp(-beta * shifted);
    sum += out[j];
    weighted += out[j] * shifted;
  }
  for (double& v : out) v /= sum;
  const double h_nats = std::log(sum) + beta * weighted / sum;
  return h_nats / std::log(2.0);
}

}  // namespace

AffinityMatrix conditional_probabilities(const std::vector<std::vector<double>>& x, double perplexity) {
  const std::size_t n = x.size();
  if (n < 4) throw ConfigError("t-SNE needs at least 4 points");
  if (!(perplexity >= 1.0) || perplexity > static_cast<double>(n - 1))
    throw ConfigError("perplexity must lie in [1, N-1]");
  for (const auto& r : x)
    if (r.size() != x[0].size()) throw ShapeError("t-SNE input rows differ in length");

  std::vector<double> d(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < x[i].size(); ++k) {
        const double e = x[i][k] - x[j][k];
        s += e * e;
      }
      s = std::max(s, kDistanceFloor);
      d[i * n + j] = d[j * n + i] = s;
    }

  AffinityMatrix m{n, std::vector<double>(n * n, 0.0)};
  const double target = std::log2(perplexity);
  for (std::size_t i = 0; i < n; ++i) {
    const std::span<const double> di(&d[i * n], n);
    const std::span<double> row(&m.p[i * n], n);
    // entropy decreases monotonically in log_beta
    double lo = -60.0, hi = 60.0, mid = 0.0;
    for (int step = 0; step < kBisectionSteps; ++step) {
      mid = 0.5 * (lo + hi);
      const double h = fill_row(di, i, mid, row);
      if (std::abs(std::exp2(h) - perplexity) < 0.1 * kPerplexityTolerance) break;
      if (h > target)
        lo = mid;
      else
        hi = mid;
    }
  }
  return m;
}

AffinityMatrix symmetrize(const AffinityMatrix& c) {
  AffinityMatrix p{c.n, std::vector<double>(c.n * c.n, 0.0)};
  const double denom = 2.0 * static_cast<double>(c.n);
  for (std::size_t i = 0; i < c.n; ++i)
    for (std::size_t j = 0; j < c.n; ++j) p.p[i * c.n + j] = (c(i, j) + c(j, i)) / denom;
  return p;
}

AffinityMatrix conditional_affinities(const std::vector<std::vector<double>>& x, double perplexity) {
  return symmetrize(conditional_probabilities(x, perplexity));
}

double row_perplexity(const AffinityMatrix& m, std::size_t i) {
  double h = 0.0;
  for (std::size_t j = 0; j < m.n; ++j) {
    const double v = m(i, j);
    if (v > 0.0) h -= v * std::log2(v);
  }
  return std::exp2(h);
}

AffinityMatrix low_dim_affinities(const Embedding& y) {
  const std::size_t n = y.n;
  AffinityMatrix q{n, std::vector<double>(n * n, 0.0)};
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      double d2 = 0.0;
      for (std::size_t k = 0; k < y.dims; ++k) {
        const double e = y.at(i, k) - y.at(j, k);
        d2 += e * e;
      }
      const double num = 1.0 / (1.0 + d2);
      q.p[i * n + j] = q.p[j * n + i] = num;
      sum += 2.0 * num;
    }
  for (double& v : q.p) v /= sum;
  return q;
}

double kl_divergence(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) throw ShapeError("kl_divergence: sizes differ");
  double kl = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i)
    if (p[i] > 0.0) kl += p[i] * std::log(p[i] / std::max(q[i], kProbabilityFloor));
  return kl;
}

std::vector<double> kl_gradient(const AffinityMatrix& p, const Embedding& y) {
  if (p.n != y.n) throw ShapeError("kl_gradient: affinity and embedding sizes differ");
  const std::size_t n = y.n, dims = y.dims;
  std::vector<double> num(n * n, 0.0);
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      double d2 = 0.0;
      for (std::size_t k = 0; k < dims; ++k) {
        const double e = y.at(i, k) - y.at(j, k);
        d2 += e * e;
      }
      num[i * n + j] = num[j * n + i] = 1.0 / (1.0 + d2);
      sum += 2.0 * num[i * n + j];
    }
  std::vector<double> grad(n * dims, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      const double w = num[i * n + j];
      const double coeff = 4.0 * (p(i, j) - w / sum) * w;
      for (std::size_t k = 0; k < dims; ++k) grad[i * dims + k] += coeff * (y.at(i, k) - y.at(j, k));
    }
  return grad;
}

TsneResult tsne_embed(const AffinityMatrix& p, const TsneConfig& cfg) {
  if (p.n < 2 || p.p.size() != p.n * p.n) throw ShapeError("tsne_embed: malformed affinity matrix");
  if (cfg.dims != 2 && cfg.dims != 3) throw ConfigError("embedding dimension must be 2 or 3");
  const std::size_t n = p.n, dims = cfg.dims;
  TsneResult r;
  r.embedding = {n, dims, std::vector<double>(n * dims)};
  Prng prng(cfg.seed);
  for (double& v : r.embedding.coords) v = 1e-4 * prng.normal();

  AffinityMatrix exaggerated = p;
  for (double& v : exaggerated.p) v *= cfg.exaggeration;
  std::vector<double> velocity(n * dims, 0.0);
  std::vector<double> gains(n * dims, 1.0);
  for (std::size_t it = 0; it < cfg.iterations; ++it) {
    const AffinityMatrix& target = it < cfg.exaggeration_iters ? exaggerated : p;
    const double mu = it < cfg.momentum_switch ? cfg.momentum : cfg.final_momentum;
    const auto grad = kl_gradient(target, r.embedding);
    for (std::size_t k = 0; k < velocity.size(); ++k) {
      // per-coordinate gains: grow while the step direction keeps flipping, decay otherwise
      gains[k] = (grad[k] > 0.0) != (velocity[k] > 0.0) ? gains[k] + 0.2 : std::max(gains[k] * 0.8, 0.01);
      velocity[k] = mu * velocity[k] - cfg.learning_rate * gains[k] * grad[k];
      r.embedding.coords[k] += velocity[k];
    }
    // recentre; KL is translation invariant
    for (std::size_t d = 0; d < dims; ++d) {
      double mean = 0.0;
      for (std::size_t i = 0; i < n; ++i) mean += r.embedding.coords[i * dims + d];
      mean /= static_cast<double>(n);
      for (std::size_t i = 0; i < n; ++i) r.embedding.coords[i * dims + d] -= mean;
    }
    r.kl_trace.push_back(kl_divergence(p.p, low_dim_affinities(r.embedding).p));
  }
  return r;
}

}  // namespace pmtnet
