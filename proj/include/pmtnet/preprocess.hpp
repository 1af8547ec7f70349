#pragma once

#include "pmtnet/event.hpp"

namespace pmtnet {

/// Destination column (0-based) of the column holding the global maximum.
inline constexpr std::size_t kCenterColumn = 12;
/// Divisor applied after the log transform.
inline constexpr double kLogScaleDivisor = 10.0;

enum class PreprocessPath { Supervised, Unsupervised };

/// ln(1 + q) / 10 elementwise. Throws DomainError on negative or non-finite charge.
PreprocessedGrid log_scale(const EventGrid& grid);

/// Rotates columns so the column holding the global maximum lands on column 12.
/// Ties go to the lowest column index. A grid that is already centered is
/// returned unchanged.
PreprocessedGrid center_columns(const PreprocessedGrid& grid);

/// Supervised: log_scale then center_columns. Unsupervised: log_scale only.
PreparedDataset prepare(const Dataset& dataset, PreprocessPath path);

}  // namespace pmtnet
