#include "pmtnet/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "pmtnet/binary_io.hpp"
#include "pmtnet/errors.hpp"
#include "pmtnet/models.hpp"
#include "pmtnet/tensor.hpp"

namespace pmtnet {

namespace {

constexpr std::string_view kMagic = "NLNS";

void check_rows(const FeatureRows& rows) {
  if (rows.empty()) throw DataError("empty training set");
  for (const auto& r : rows)
    if (r.size() != rows[0].size()) throw DataError("feature rows differ in length");
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

void write_header(ByteWriter& w, ModelKind kind) {
  w.tag(kMagic);
  w.u16(kModelFormatVersion);
  w.u8(static_cast<std::uint8_t>(kind));
}

void read_header(ByteReader& r, ModelKind expected) {
  r.expect_tag(kMagic);
  const auto version = r.u16();
  if (version != kModelFormatVersion) throw FormatError("unsupported model format version " + std::to_string(version));
  const auto kind = static_cast<ModelKind>(r.u8());
  if (kind != expected) throw KindError("container holds a " + to_string(kind) + " model, expected " + to_string(expected));
}

}  // namespace

FeatureRows flatten(const PreparedDataset& data) {
  FeatureRows rows;
  rows.reserve(data.size());
  for (const auto& g : data.grids) rows.emplace_back(g.values.begin(), g.values.end());
  return rows;
}

KnnModel knn_fit(FeatureRows vectors, std::vector<EventLabel> labels, std::size_t k) {
  check_rows(vectors);
  if (vectors.size() != labels.size()) throw DataError("rows and labels differ in length");
  if (k == 0 || k % 2 == 0) throw ConfigError("k must be a positive odd integer");
  if (k > vectors.size()) throw ConfigError("k exceeds the training set size");
  return {std::move(vectors), std::move(labels), k};
}

EventLabel knn_classify(const KnnModel& model, std::span<const double> query) {
  if (model.vectors.empty()) throw StateError("k-NN model holds no training data");
  if (query.size() != model.vectors[0].size()) throw ShapeError("query dimension differs from training rows");
  const std::size_t n = model.vectors.size();
  std::vector<std::pair<double, std::size_t>> dist(n);
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    const auto& v = model.vectors[i];
    for (std::size_t d = 0; d < query.size(); ++d) {
      const double e = v[d] - query[d];
      s += e * e;
    }
    dist[i] = {s, i};
  }
  const std::size_t k = std::min(model.k, n);
  std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k), dist.end());
  std::array<std::size_t, kNumClasses> votes{};
  std::array<std::size_t, kNumClasses> first_rank;
  first_rank.fill(std::numeric_limits<std::size_t>::max());
  for (std::size_t r = 0; r < k; ++r) {
    const std::size_t c = index_of(model.labels[dist[r].second]);
    ++votes[c];
    first_rank[c] = std::min(first_rank[c], r);
  }
  std::size_t best = 0;
  for (std::size_t c = 1; c < kNumClasses; ++c)
    if (votes[c] > votes[best] || (votes[c] == votes[best] && first_rank[c] < first_rank[best])) best = c;
  return label_from_index(best);
}

std::vector<EventLabel> knn_classify_all(const KnnModel& model, const FeatureRows& queries) {
  std::vector<EventLabel> out;
  out.reserve(queries.size());
  for (const auto& q : queries) out.push_back(knn_classify(model, q));
  return out;
}

SvmModel svm_train(const FeatureRows& data, std::span<const EventLabel> labels, const SvmConfig& cfg) {
  check_rows(data);
  if (data.size() != labels.size()) throw DataError("rows and labels differ in length");
  if (!(cfg.lambda > 0.0) || cfg.epochs == 0) throw ConfigError("svm needs lambda > 0 and epochs > 0");
  std::array<bool, kNumClasses> present{};
  for (EventLabel l : labels) present[index_of(l)] = true;
  if (std::count(present.begin(), present.end(), true) < 2) throw DataError("svm training needs at least two classes");

  const std::size_t dim = data[0].size();
  SvmModel m;
  m.config = cfg;
  Prng prng(cfg.seed);
  std::vector<std::size_t> order(data.size());
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    std::vector<double> w(dim, 0.0);
    double b = 0.0;
    std::uint64_t t = 0;
    Prng stream = prng.substream(c);
    for (std::size_t e = 0; e < cfg.epochs; ++e) {
      std::iota(order.begin(), order.end(), std::size_t{0});
      stream.shuffle(order);
      for (std::size_t i : order) {
        ++t;
        const double eta = 1.0 / (cfg.lambda * static_cast<double>(t));
        const double y = index_of(labels[i]) == c ? 1.0 : -1.0;
        const bool violated = y * (dot(w, data[i]) + b) < 1.0;
        const double shrink = 1.0 - eta * cfg.lambda;
        for (double& v : w) v *= shrink;
        b *= shrink;
        if (violated) {
          for (std::size_t d = 0; d < dim; ++d) w[d] += eta * y * data[i][d];
          b += eta * y;
        }
      }
    }
    m.weights[c] = std::move(w);
    m.bias[c] = b;
  }
  return m;
}

std::array<double, kNumClasses> svm_scores(const SvmModel& model, std::span<const double> query) {
  std::array<double, kNumClasses> s{};
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    if (model.weights[c].size() != query.size()) throw ShapeError("query dimension differs from svm weights");
    s[c] = dot(model.weights[c], query) + model.bias[c];
  }
  return s;
}

EventLabel svm_predict(const SvmModel& model, std::span<const double> query) {
  const auto s = svm_scores(model, query);
  std::size_t best = 0;
  for (std::size_t c = 1; c < kNumClasses; ++c)
    if (s[c] > s[best]) best = c;
  return label_from_index(best);
}

std::vector<EventLabel> svm_predict_all(const SvmModel& model, const FeatureRows& queries) {
  std::vector<EventLabel> out;
  out.reserve(queries.size());
  for (const auto& q : queries) out.push_back(svm_predict(model, q));
  return out;
}

// "NLNS" u16 version u8 kind=3 u32 k u32 count u32 dim, then per row: u8 label f64[dim]
std::vector<std::uint8_t> serialize_knn(const KnnModel& model) {
  check_rows(model.vectors);
  ByteWriter w;
  write_header(w, ModelKind::Knn);
  w.u32(static_cast<std::uint32_t>(model.k));
  w.u32(static_cast<std::uint32_t>(model.vectors.size()));
  w.u32(static_cast<std::uint32_t>(model.vectors[0].size()));
  for (std::size_t i = 0; i < model.vectors.size(); ++i) {
    w.u8(static_cast<std::uint8_t>(model.labels[i]));
    w.f64s(model.vectors[i]);
  }
  return w.take();
}

KnnModel deserialize_knn(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  read_header(r, ModelKind::Knn);
  const std::uint32_t k = r.u32();
  const std::uint32_t count = r.u32();
  const std::uint32_t dim = r.u32();
  if (static_cast<std::uint64_t>(count) * (1 + 8ULL * dim) != r.remaining()) throw FormatError("k-NN payload length mismatch");
  FeatureRows rows(count);
  std::vector<EventLabel> labels(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    const std::uint8_t l = r.u8();
    if (l >= kNumClasses) throw FormatError("label out of range");
    labels[i] = static_cast<EventLabel>(l);
    rows[i] = r.f64s(dim);
  }
  try {
    return knn_fit(std::move(rows), std::move(labels), k);
  } catch (const Error& e) {
    throw FormatError(std::string("invalid k-NN payload: ") + e.what());
  }
}

// "NLNS" u16 version u8 kind=4 f64 lambda u32 epochs u64 seed u32 classes u32 dim
// f64[classes*dim] weights f64[classes] biases
std::vector<std::uint8_t> serialize_svm(const SvmModel& model) {
  ByteWriter w;
  write_header(w, ModelKind::Svm);
  w.f64(model.config.lambda);
  w.u32(static_cast<std::uint32_t>(model.config.epochs));
  w.u64(model.config.seed);
  w.u32(static_cast<std::uint32_t>(kNumClasses));
  w.u32(static_cast<std::uint32_t>(model.weights[0].size()));
  for (const auto& wc : model.weights) w.f64s(wc);
  w.f64s(model.bias);
  return w.take();
}

SvmModel deserialize_svm(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  read_header(r, ModelKind::Svm);
  SvmModel m;
  m.config.lambda = r.f64();
  m.config.epochs = r.u32();
  m.config.seed = r.u64();
  if (r.u32() != kNumClasses) throw FormatError("svm container must hold five classes");
  const std::uint32_t dim = r.u32();
  for (auto& wc : m.weights) wc = r.f64s(dim);
  const auto b = r.f64s(kNumClasses);
  std::copy(b.begin(), b.end(), m.bias.begin());
  r.expect_end();
  return m;
}

void save_knn(const KnnModel& model, const std::filesystem::path& path) { write_file_bytes(path, serialize_knn(model)); }
KnnModel load_knn(const std::filesystem::path& path) { return deserialize_knn(read_file_bytes(path)); }
void save_svm(const SvmModel& model, const std::filesystem::path& path) { write_file_bytes(path, serialize_svm(model)); }
SvmModel load_svm(const std::filesystem::path& path) { return deserialize_svm(read_file_bytes(path)); }

}  // namespace pmtnet
