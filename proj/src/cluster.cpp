#include "pmtnet/cluster.hpp"

#include <limits>
#include <map>

#include "pmtnet/errors.hpp"
#include "pmtnet/tensor.hpp"

namespace pmtnet {

namespace {

double sq_dist(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

KMeansResult lloyd(const std::vector<std::vector<double>>& pts, std::size_t k, Prng& prng, std::size_t max_iters) {
  const std::size_t n = pts.size();
  KMeansResult r;
  // k-means++ seeding
  r.centroids.push_back(pts[prng.below(n)]);
  std::vector<double> d2(n);
  while (r.centroids.size() < k) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double best = std::numeric_limits<double>::max();
      for (const auto& c : r.centroids) best = std::min(best, sq_dist(pts[i], c));
      d2[i] = best;
      total += best;
    }
    std::size_t pick = prng.below(n);
    if (total > 0.0) {
      double u = prng.uniform() * total;
      for (std::size_t i = 0; i < n; ++i) {
        u -= d2[i];
        if (u < 0.0) {
          pick = i;
          break;
        }
      }
    }
    r.centroids.push_back(pts[pick]);
  }

  r.assignment.assign(n, 0);
  const std::size_t dim = pts[0].size();
  for (std::size_t iter = 0; iter < max_iters; ++iter) {
    bool changed = iter == 0;
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t best = 0;
      double bd = sq_dist(pts[i], r.centroids[0]);
      for (std::size_t c = 1; c < k; ++c) {
        const double d = sq_dist(pts[i], r.centroids[c]);
        if (d < bd) {
          bd = d;
          best = c;
        }
      }
      if (best != r.assignment[i]) changed = true;
      r.assignment[i] = best;
    }
    if (!changed) break;
    std::vector<std::vector<double>> sums(k, std::vector<double>(dim, 0.0));
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      ++counts[r.assignment[i]];
      for (std::size_t d = 0; d < dim; ++d) sums[r.assignment[i]][d] += pts[i][d];
    }
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] == 0) continue;  // empty cluster keeps its centroid
      for (std::size_t d = 0; d < dim; ++d) r.centroids[c][d] = sums[c][d] / static_cast<double>(counts[c]);
    }
  }
  r.inertia = 0.0;
  for (std::size_t i = 0; i < n; ++i) r.inertia += sq_dist(pts[i], r.centroids[r.assignment[i]]);
  return r;
}

}  // namespace

KMeansResult kmeans(const std::vector<std::vector<double>>& points, std::size_t k, std::uint64_t seed,
                    std::size_t restarts, std::size_t max_iters) {
  if (k == 0 || points.size() < k) throw DataError("k-means needs at least k points");
  for (const auto& p : points)
    if (p.size() != points[0].size()) throw DataError("k-means rows differ in length");
  Prng prng(seed);
  KMeansResult best;
  best.inertia = std::numeric_limits<double>::infinity();
  for (std::size_t r = 0; r < std::max<std::size_t>(restarts, 1); ++r) {
    KMeansResult cand = lloyd(points, k, prng, max_iters);
    if (cand.inertia < best.inertia) best = std::move(cand);
  }
  return best;
}

double cluster_purity(std::span<const std::size_t> assignment, std::span<const std::size_t> labels) {
  if (assignment.size() != labels.size() || assignment.empty()) throw DataError("purity needs equal, non-empty inputs");
  std::map<std::size_t, std::map<std::size_t, std::size_t>> table;
  for (std::size_t i = 0; i < assignment.size(); ++i) ++table[assignment[i]][labels[i]];
  std::size_t majority = 0;
  for (const auto& [cluster, counts] : table) {
    std::size_t m = 0;
    for (const auto& [label, c] : counts) m = std::max(m, c);
    majority += m;
  }
  return static_cast<double>(majority) / static_cast<double>(assignment.size());
}

}  // namespace pmtnet
