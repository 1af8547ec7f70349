#include "pmtnet/preprocess.hpp"

#include <cmath>

#include "pmtnet/errors.hpp"

namespace pmtnet {

PreprocessedGrid log_scale(const EventGrid& grid) {
  PreprocessedGrid out;
  for (std::size_t p = 0; p < kPmts; ++p) {
    const double q = grid.q[p];
    if (!(q >= 0.0) || !std::isfinite(q)) throw DomainError("charge must be finite and >= 0");
    out.values[p] = std::log1p(q) / kLogScaleDivisor;
  }
  return out;
}

PreprocessedGrid center_columns(const PreprocessedGrid& grid) {
  if (grid.centered) return grid;
  std::size_t best = 0;
  for (std::size_t p = 1; p < kPmts; ++p) {
    const std::size_t col = p % kColumns, best_col = best % kColumns;
    if (grid.values[p] > grid.values[best] || (grid.values[p] == grid.values[best] && col < best_col)) best = p;
  }
  const std::size_t shift = (kCenterColumn + kColumns - best % kColumns) % kColumns;
  PreprocessedGrid out;
  for (std::size_t i = 0; i < kRings; ++i)
    for (std::size_t j = 0; j < kColumns; ++j) out.at(i, (j + shift) % kColumns) = grid.at(i, j);
  out.centered = true;
  out.shift = shift;
  return out;
}

PreparedDataset prepare(const Dataset& dataset, PreprocessPath path) {
  PreparedDataset out;
  out.labels = dataset.labels;
  out.grids.reserve(dataset.size());
  for (const auto& g : dataset.grids) {
    PreprocessedGrid p = log_scale(g);
    out.grids.push_back(path == PreprocessPath::Supervised ? center_columns(p) : p);
  }
  return out;
}

}  // namespace pmtnet
