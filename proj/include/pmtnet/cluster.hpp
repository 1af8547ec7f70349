#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace pmtnet {

struct KMeansResult {
  std::vector<std::size_t> assignment;
  std::vector<std::vector<double>> centroids;
  double inertia = 0.0;  // sum of squared distances to the assigned centroid
};

/// Lloyd's algorithm from k-means++ seeds; the best of `restarts` runs by
/// inertia is returned. Deterministic per seed. Throws DataError if there are
/// fewer points than clusters or rows differ in length.
KMeansResult kmeans(const std::vector<std::vector<double>>& points, std::size_t k, std::uint64_t seed,
                    std::size_t restarts = 10, std::size_t max_iters = 300);

/// Fraction of points whose label equals the majority label of their cluster.
double cluster_purity(std::span<const std::size_t> assignment, std::span<const std::size_t> labels);

}  // namespace pmtnet
