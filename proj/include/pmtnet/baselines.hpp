#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "pmtnet/event.hpp"

namespace pmtnet {

using FeatureRows = std::vector<std::vector<double>>;

/// Flattened 192-value rows of a prepared dataset.
FeatureRows flatten(const PreparedDataset& data);

struct KnnModel {
  FeatureRows vectors;
  std::vector<EventLabel> labels;
  std::size_t k = 5;
};

/// Stores the training set. Throws DataError on empty or ragged data and
/// ConfigError unless k is odd and <= the number of rows.
KnnModel knn_fit(FeatureRows vectors, std::vector<EventLabel> labels, std::size_t k = 5);

/// Majority vote among the k Euclidean-nearest rows. Distance ties go to the
/// lower training index; vote ties go to the class whose nearest member is
/// closest. Throws StateError on an empty model.
EventLabel knn_classify(const KnnModel& model, std::span<const double> query);
std::vector<EventLabel> knn_classify_all(const KnnModel& model, const FeatureRows& queries);

struct SvmConfig {
  double lambda = 1e-4;
  std::size_t epochs = 30;
  std::uint64_t seed = 1;
};

/// Five one-vs-rest linear classifiers; the bias is the weight on an implicit
/// constant feature and is regularised with the rest.
struct SvmModel {
  std::array<std::vector<double>, kNumClasses> weights;
  std::array<double, kNumClasses> bias{};
  SvmConfig config;
};

/// Pegasos: per epoch one shuffled pass, at step t
///   w <- (1 - 1/t) w + [y (w.x + b) < 1] y x / (lambda t).
/// Throws DataError when fewer than two classes are present.
SvmModel svm_train(const FeatureRows& data, std::span<const EventLabel> labels, const SvmConfig& cfg = {});

std::array<double, kNumClasses> svm_scores(const SvmModel& model, std::span<const double> query);
/// Argmax of the scores; ties go to the lowest class index.
EventLabel svm_predict(const SvmModel& model, std::span<const double> query);
std::vector<EventLabel> svm_predict_all(const SvmModel& model, const FeatureRows& queries);

std::vector<std::uint8_t> serialize_knn(const KnnModel& model);
KnnModel deserialize_knn(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> serialize_svm(const SvmModel& model);
SvmModel deserialize_svm(std::span<const std::uint8_t> bytes);

void save_knn(const KnnModel& model, const std::filesystem::path& path);
KnnModel load_knn(const std::filesystem::path& path);
void save_svm(const SvmModel& model, const std::filesystem::path& path);
SvmModel load_svm(const std::filesystem::path& path);

}  // namespace pmtnet
