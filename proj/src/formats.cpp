#include "pmtnet/formats.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <sstream>

#include "pmtnet/binary_io.hpp"
#include "pmtnet/errors.hpp"

namespace pmtnet {

namespace {

constexpr std::string_view kDatasetMagic = "DYBS";

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

}  // namespace

std::vector<std::uint8_t> serialize_dataset(const Dataset& ds) {
  if (ds.grids.size() != ds.labels.size()) throw DataError("grids and labels differ in length");
  ByteWriter w;
  w.tag(kDatasetMagic);
  w.u16(kDatasetFormatVersion);
  w.u32(static_cast<std::uint32_t>(ds.size()));
  for (std::size_t i = 0; i < ds.size(); ++i) {
    w.u8(static_cast<std::uint8_t>(ds.labels[i]));
    for (double q : ds.grids[i].q) w.f32(static_cast<float>(q));
  }
  return w.take();
}

Dataset deserialize_dataset(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  r.expect_tag(kDatasetMagic);
  const auto version = r.u16();
  if (version != kDatasetFormatVersion) throw FormatError("unsupported dataset version " + std::to_string(version));
  const std::uint32_t count = r.u32();
  if (r.remaining() != static_cast<std::size_t>(count) * kDatasetRecordBytes)
    throw FormatError("dataset length does not match its event count");
  Dataset ds;
  ds.grids.resize(count);
  ds.labels.resize(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    const std::uint8_t l = r.u8();
    if (l >= kNumClasses) throw FormatError("event " + std::to_string(i) + " has label " + std::to_string(l));
    ds.labels[i] = static_cast<EventLabel>(l);
    for (double& q : ds.grids[i].q) {
      const float f = r.f32();
      if (!std::isfinite(f) || f < 0.0f) throw FormatError("event " + std::to_string(i) + " has an invalid charge");
      q = f;
    }
  }
  return ds;
}

void save_dataset(const Dataset& ds, const std::filesystem::path& path) { write_file_bytes(path, serialize_dataset(ds)); }

Dataset load_dataset(const std::filesystem::path& path) { return deserialize_dataset(read_file_bytes(path)); }

std::string format_labeled_csv(const LabeledRows& t) {
  if (t.rows.size() != t.labels.size()) throw DataError("rows and labels differ in length");
  std::string out;
  for (const auto& c : t.columns) out += c + ',';
  out += "label\n";
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    if (t.rows[i].size() != t.columns.size()) throw DataError("row width differs from header");
    for (double v : t.rows[i]) out += num(v) + ',';
    out += std::to_string(index_of(t.labels[i])) + '\n';
  }
  return out;
}

LabeledRows parse_labeled_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw FormatError("empty CSV");
  LabeledRows t;
  t.columns = split(line, ',');
  if (t.columns.empty() || t.columns.back() != "label") throw FormatError("CSV header must end with 'label'");
  t.columns.pop_back();
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto cells = split(line, ',');
    if (cells.size() != t.columns.size() + 1) throw FormatError("CSV line " + std::to_string(lineno) + " has the wrong width");
    std::vector<double> row;
    for (std::size_t c = 0; c < t.columns.size(); ++c) {
      char* end = nullptr;
      const double v = std::strtod(cells[c].c_str(), &end);
      if (cells[c].empty() || *end != '\0') throw FormatError("CSV line " + std::to_string(lineno) + ": bad number");
      row.push_back(v);
    }
    char* end = nullptr;
    const long l = std::strtol(cells.back().c_str(), &end, 10);
    if (cells.back().empty() || *end != '\0' || l < 0 || l >= static_cast<long>(kNumClasses))
      throw FormatError("CSV line " + std::to_string(lineno) + ": bad label");
    t.rows.push_back(std::move(row));
    t.labels.push_back(static_cast<EventLabel>(l));
  }
  return t;
}

LabeledRows feature_rows(const std::vector<std::vector<double>>& features, std::span<const EventLabel> labels) {
  LabeledRows t;
  const std::size_t k = features.empty() ? 0 : features[0].size();
  for (std::size_t i = 0; i < k; ++i) t.columns.push_back("f" + std::to_string(i));
  t.rows = features;
  t.labels.assign(labels.begin(), labels.end());
  return t;
}

LabeledRows embedding_rows(const Embedding& e, std::span<const EventLabel> labels) {
  if (labels.size() != e.n) throw DataError("embedding and labels differ in length");
  LabeledRows t;
  t.columns = {"x", "y"};
  if (e.dims == 3) t.columns.push_back("z");
  for (std::size_t i = 0; i < e.n; ++i) t.rows.emplace_back(e.coords.begin() + static_cast<std::ptrdiff_t>(i * e.dims),
                                                              e.coords.begin() + static_cast<std::ptrdiff_t>((i + 1) * e.dims));
  t.labels.assign(labels.begin(), labels.end());
  return t;
}

}  // namespace pmtnet
