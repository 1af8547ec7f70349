#include "pmtnet/metrics.hpp"

#include <cstdio>
#include <numeric>
#include <sstream>

#include "pmtnet/errors.hpp"

namespace pmtnet {

namespace {

double ratio(double num, double den) { return den == 0.0 ? 0.0 : num / den; }

void require_nonempty(const ConfusionMatrix& cm) {
  if (cm.total() == 0) throw DataError("empty confusion matrix");
}

std::string fixed3(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

std::string full(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

}  // namespace

std::uint64_t ConfusionMatrix::total() const noexcept {
  std::uint64_t t = 0;
  for (const auto& row : counts) t = std::accumulate(row.begin(), row.end(), t);
  return t;
}

std::uint64_t ConfusionMatrix::trace() const noexcept {
  std::uint64_t t = 0;
  for (std::size_t c = 0; c < kNumClasses; ++c) t += counts[c][c];
  return t;
}

std::uint64_t ConfusionMatrix::false_positives(std::size_t c) const noexcept {
  std::uint64_t s = 0;
  for (std::size_t t = 0; t < kNumClasses; ++t)
    if (t != c) s += counts[t][c];
  return s;
}

std::uint64_t ConfusionMatrix::false_negatives(std::size_t c) const noexcept {
  std::uint64_t s = 0;
  for (std::size_t p = 0; p < kNumClasses; ++p)
    if (p != c) s += counts[c][p];
  return s;
}

ConfusionMatrix confusion(std::span<const EventLabel> truth, std::span<const EventLabel> predicted) {
  if (truth.size() != predicted.size()) throw DataError("truth and prediction lengths differ");
  ConfusionMatrix cm;
  for (std::size_t i = 0; i < truth.size(); ++i) ++cm.counts[index_of(truth[i])][index_of(predicted[i])];
  return cm;
}

PerClass precision_per_class(const ConfusionMatrix& cm) {
  require_nonempty(cm);
  PerClass out{};
  for (std::size_t c = 0; c < kNumClasses; ++c)
    out[c] = ratio(static_cast<double>(cm.true_positives(c)),
                   static_cast<double>(cm.true_positives(c) + cm.false_positives(c)));
  return out;
}

PerClass recall_per_class(const ConfusionMatrix& cm) {
  require_nonempty(cm);
  PerClass out{};
  for (std::size_t c = 0; c < kNumClasses; ++c)
    out[c] = ratio(static_cast<double>(cm.true_positives(c)),
                   static_cast<double>(cm.true_positives(c) + cm.false_negatives(c)));
  return out;
}

PerClass f1_per_class(const ConfusionMatrix& cm) {
  const PerClass p = precision_per_class(cm);
  const PerClass r = recall_per_class(cm);
  PerClass out{};
  for (std::size_t c = 0; c < kNumClasses; ++c) out[c] = ratio(2.0 * p[c] * r[c], p[c] + r[c]);
  return out;
}

PerClass accuracy_per_class(const ConfusionMatrix& cm) {
  require_nonempty(cm);
  const double total = static_cast<double>(cm.total());
  PerClass out{};
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    const double wrong = static_cast<double>(cm.false_positives(c) + cm.false_negatives(c));
    out[c] = (total - wrong) / total;
  }
  return out;
}

double overall_accuracy(const ConfusionMatrix& cm) {
  require_nonempty(cm);
  return static_cast<double>(cm.trace()) / static_cast<double>(cm.total());
}

double macro_f1(const ConfusionMatrix& cm) {
  const PerClass f = f1_per_class(cm);
  return std::accumulate(f.begin(), f.end(), 0.0) / static_cast<double>(kNumClasses);
}

std::string format_report_text(const std::vector<MethodReport>& reports) {
  std::ostringstream os;
  const auto header = [&](const char* title) {
    os << title;
    for (EventLabel l : kAllLabels) {
      char buf[16];
      std::snprintf(buf, sizeof buf, "%12s", std::string(label_name(l)).c_str());
      os << buf;
    }
    os << '\n';
  };
  const auto row = [&](const std::string& method, const PerClass& v) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "  %-10s", method.c_str());
    os << buf;
    for (double x : v) {
      std::snprintf(buf, sizeof buf, "%12s", fixed3(x).c_str());
      os << buf;
    }
    os << '\n';
  };
  header("F1-score    ");
  for (const auto& r : reports) row(r.method, f1_per_class(r.cm));
  header("Accuracy    ");
  for (const auto& r : reports) row(r.method, accuracy_per_class(r.cm));
  os << "Overall\n";
  for (const auto& r : reports)
    os << "  " << r.method << ": accuracy " << fixed3(overall_accuracy(r.cm)) << ", macro F1 " << fixed3(macro_f1(r.cm))
       << ", n=" << r.cm.total() << '\n';
  return os.str();
}

std::string format_report_kv(const std::vector<MethodReport>& reports) {
  std::ostringstream os;
  for (const auto& r : reports) {
    const PerClass f1 = f1_per_class(r.cm);
    const PerClass acc = accuracy_per_class(r.cm);
    for (std::size_t c = 0; c < kNumClasses; ++c) os << r.method << ".f1." << label_key(kAllLabels[c]) << '=' << full(f1[c]) << '\n';
    for (std::size_t c = 0; c < kNumClasses; ++c)
      os << r.method << ".accuracy." << label_key(kAllLabels[c]) << '=' << full(acc[c]) << '\n';
    os << r.method << ".overall_accuracy=" << full(overall_accuracy(r.cm)) << '\n';
    os << r.method << ".macro_f1=" << full(macro_f1(r.cm)) << '\n';
    os << r.method << ".count=" << r.cm.total() << '\n';
  }
  return os.str();
}

}  // namespace pmtnet
