#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "pmtnet/event.hpp"

namespace pmtnet {

/// counts[true][predicted].
struct ConfusionMatrix {
  std::array<std::array<std::uint64_t, kNumClasses>, kNumClasses> counts{};

  std::uint64_t total() const noexcept;
  std::uint64_t trace() const noexcept;
  std::uint64_t true_positives(std::size_t c) const noexcept { return counts[c][c]; }
  std::uint64_t false_positives(std::size_t c) const noexcept;
  std::uint64_t false_negatives(std::size_t c) const noexcept;
};

/// Throws DataError when the sequences differ in length.
ConfusionMatrix confusion(std::span<const EventLabel> truth, std::span<const EventLabel> predicted);

using PerClass = std::array<double, kNumClasses>;

// All of the following throw DataError on an empty matrix. 0/0 evaluates to 0.
PerClass precision_per_class(const ConfusionMatrix& cm);
PerClass recall_per_class(const ConfusionMatrix& cm);
PerClass f1_per_class(const ConfusionMatrix& cm);
/// One-vs-rest accuracy (TP + TN) / total for each class.
PerClass accuracy_per_class(const ConfusionMatrix& cm);
double overall_accuracy(const ConfusionMatrix& cm);
double macro_f1(const ConfusionMatrix& cm);

struct MethodReport {
  std::string method;  // "cnn", "knn", "svm"
  ConfusionMatrix cm;
};

/// Per-class F1 and accuracy rows for each method, laid out like a results table.
std::string format_report_text(const std::vector<MethodReport>& reports);
/// One `method.metric.class=value` line per entry, plus overall accuracy and macro F1.
std::string format_report_kv(const std::vector<MethodReport>& reports);

}  // namespace pmtnet
