#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "pmtnet/errors.hpp"
#include "pmtnet/metrics.hpp"
#include "pmtnet/tensor.hpp"

using namespace pmtnet;

namespace {

std::vector<EventLabel> labels(std::initializer_list<int> xs) {
  std::vector<EventLabel> out;
  for (int x : xs) out.push_back(label_from_index(static_cast<std::size_t>(x)));
  return out;
}

}  // namespace

TEST(Confusion, PerfectPredictionsAreDiagonal) {
  const auto t = labels({0, 1, 2, 3, 4, 4, 2});
  const ConfusionMatrix cm = confusion(t, t);
  for (std::size_t i = 0; i < kNumClasses; ++i)
    for (std::size_t j = 0; j < kNumClasses; ++j)
      if (i != j) EXPECT_EQ(cm.counts[i][j], 0u);
  EXPECT_EQ(cm.trace(), 7u);
  EXPECT_EQ(cm.total(), 7u);
}

TEST(Confusion, AllPredictedZero) {
  const auto t = labels({0, 1, 2, 3, 4});
  const auto p = labels({0, 0, 0, 0, 0});
  const ConfusionMatrix cm = confusion(t, p);
  for (std::size_t i = 0; i < kNumClasses; ++i) {
    EXPECT_EQ(cm.counts[i][0], 1u);
    for (std::size_t j = 1; j < kNumClasses; ++j) EXPECT_EQ(cm.counts[i][j], 0u);
  }
}

TEST(Confusion, Enumeration) {
  const ConfusionMatrix cm = confusion(labels({0, 0, 1}), labels({0, 1, 1}));
  EXPECT_EQ(cm.counts[0][0], 1u);
  EXPECT_EQ(cm.counts[0][1], 1u);
  EXPECT_EQ(cm.counts[1][1], 1u);
  EXPECT_EQ(cm.total(), 3u);
}

TEST(Confusion, LengthMismatch) { EXPECT_THROW(confusion(labels({0, 1}), labels({0})), DataError); }

TEST(PerClass, DiagonalIsPerfect) {
  const auto t = labels({0, 1, 2, 3, 4});
  const ConfusionMatrix cm = confusion(t, t);
  for (double v : f1_per_class(cm)) EXPECT_EQ(v, 1.0);
  for (double v : accuracy_per_class(cm)) EXPECT_EQ(v, 1.0);
  EXPECT_EQ(overall_accuracy(cm), 1.0);
  EXPECT_EQ(macro_f1(cm), 1.0);
}

TEST(PerClass, AbsentClassScoresZero) {
  const ConfusionMatrix cm = confusion(labels({0, 1}), labels({0, 1}));
  EXPECT_EQ(f1_per_class(cm)[4], 0.0);
  EXPECT_EQ(precision_per_class(cm)[4], 0.0);
  EXPECT_EQ(recall_per_class(cm)[4], 0.0);
}

TEST(PerClass, HandEvaluatedF1) {
  ConfusionMatrix cm;
  cm.counts[2][2] = 8;  // TP
  cm.counts[0][2] = 2;  // FP
  cm.counts[2][3] = 2;  // FN
  cm.counts[4][4] = 20;
  EXPECT_DOUBLE_EQ(precision_per_class(cm)[2], 0.8);
  EXPECT_DOUBLE_EQ(recall_per_class(cm)[2], 0.8);
  EXPECT_NEAR(f1_per_class(cm)[2], 0.8, 1e-15);
  // one-vs-rest accuracy for class 2: (TP + TN) / total = (8 + 20) / 32
  EXPECT_DOUBLE_EQ(accuracy_per_class(cm)[2], 28.0 / 32.0);
  EXPECT_DOUBLE_EQ(overall_accuracy(cm), 28.0 / 32.0);
}

TEST(PerClass, EmptyMatrixIsDataError) {
  const ConfusionMatrix cm;
  EXPECT_THROW(f1_per_class(cm), DataError);
  EXPECT_THROW(overall_accuracy(cm), DataError);
}

TEST(PerClass, F1IsHarmonicMean) {
  Prng prng(4);
  for (int rep = 0; rep < 100; ++rep) {
    ConfusionMatrix cm;
    for (auto& row : cm.counts)
      for (auto& v : row) v = prng.below(20);
    const auto p = precision_per_class(cm), r = recall_per_class(cm), f = f1_per_class(cm);
    for (std::size_t c = 0; c < kNumClasses; ++c) {
      const double ref = p[c] + r[c] > 0 ? 2 * p[c] * r[c] / (p[c] + r[c]) : 0.0;
      EXPECT_NEAR(f[c], ref, 1e-12);
      EXPECT_GE(f[c], 0.0);
      EXPECT_LE(f[c], 1.0);
    }
  }
}

TEST(Report, KeyValueSchema) {
  const auto t = labels({0, 1, 2, 3, 4, 2});
  const auto p = labels({0, 1, 3, 3, 4, 2});
  const std::vector<MethodReport> reports{{"cnn", confusion(t, p)}, {"knn", confusion(t, t)}};
  std::istringstream kv(format_report_kv(reports));
  std::string line;
  std::size_t f1 = 0, acc = 0, lines = 0;
  while (std::getline(kv, line)) {
    ++lines;
    ASSERT_NE(line.find('='), std::string::npos);
    f1 += line.find(".f1.") != std::string::npos;
    acc += line.find(".accuracy.") != std::string::npos;
  }
  EXPECT_EQ(f1, 10u);
  EXPECT_EQ(acc, 10u);
  EXPECT_EQ(lines, 2u * (10u + 3u));
  EXPECT_NE(format_report_kv(reports).find("knn.f1.ibd_prompt=1.000000\n"), std::string::npos);
  EXPECT_NE(format_report_kv(reports).find("cnn.f1.ibd_prompt=0.666667\n"), std::string::npos);
}

TEST(Report, TextTableNamesEveryClassAndMethod) {
  const auto t = labels({0, 1, 2, 3, 4});
  const std::string text = format_report_text({{"cnn", confusion(t, t)}, {"svm", confusion(t, t)}});
  for (EventLabel l : kAllLabels) EXPECT_NE(text.find(std::string(label_name(l))), std::string::npos);
  EXPECT_NE(text.find("cnn"), std::string::npos);
  EXPECT_NE(text.find("svm"), std::string::npos);
}
