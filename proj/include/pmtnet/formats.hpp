#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "pmtnet/event.hpp"
#include "pmtnet/tsne.hpp"

namespace pmtnet {

inline constexpr std::uint16_t kDatasetFormatVersion = 1;
inline constexpr std::size_t kDatasetHeaderBytes = 10;
inline constexpr std::size_t kDatasetRecordBytes = 1 + 4 * kPmts;

/// Dataset file, little-endian:
///   offset 0  "DYBS"
///   offset 4  u16 format version (1)
///   offset 6  u32 event count
///   offset 10 per event: u8 label, then 192 f32 charges (ring-major 8 x 24)
/// Total length 10 + 769 * count. Charges are stored as f32, so a dataset read
/// back from disk re-serialises to identical bytes.
std::vector<std::uint8_t> serialize_dataset(const Dataset& ds);
/// Throws FormatError on bad magic, version, length, label or charge values.
Dataset deserialize_dataset(std::span<const std::uint8_t> bytes);
void save_dataset(const Dataset& ds, const std::filesystem::path& path);
Dataset load_dataset(const std::filesystem::path& path);

/// Rows of numbers with an integer class label in the last column.
struct LabeledRows {
  std::vector<std::string> columns;  // numeric column names, label excluded
  std::vector<std::vector<double>> rows;
  std::vector<EventLabel> labels;
};

/// CSV with header `<columns...>,label`; numbers in %.17g so reading back is exact.
std::string format_labeled_csv(const LabeledRows& rows);
/// Throws FormatError on a malformed table.
LabeledRows parse_labeled_csv(const std::string& text);

/// Feature table: columns f0..f{k-1}.
LabeledRows feature_rows(const std::vector<std::vector<double>>& features, std::span<const EventLabel> labels);
/// Embedding table: columns x,y[,z].
LabeledRows embedding_rows(const Embedding& e, std::span<const EventLabel> labels);

}  // namespace pmtnet
