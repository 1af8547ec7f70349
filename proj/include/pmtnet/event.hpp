#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace pmtnet {

inline constexpr std::size_t kRings = 8;
inline constexpr std::size_t kColumns = 24;
inline constexpr std::size_t kPmts = kRings * kColumns;
inline constexpr std::size_t kNumClasses = 5;

enum class EventLabel : std::uint8_t { Muon = 0, Flasher = 1, IBDPrompt = 2, IBDDelay = 3, Other = 4 };

inline constexpr std::array<EventLabel, kNumClasses> kAllLabels{
    EventLabel::Muon, EventLabel::Flasher, EventLabel::IBDPrompt, EventLabel::IBDDelay, EventLabel::Other};

/// Display name ("Muon", "Flasher", "IBD prompt", ...).
std::string_view label_name(EventLabel label);
/// Identifier-style key ("muon", "flasher", "ibd_prompt", ...).
std::string_view label_key(EventLabel label);
/// Throws LabelError for values >= 5.
EventLabel label_from_index(std::size_t index);
inline std::size_t index_of(EventLabel label) { return static_cast<std::size_t>(label); }

/// 8 x 24 PMT charges, row-major (ring, column). Column 23 neighbours column 0.
struct EventGrid {
  std::array<double, kPmts> q{};

  double& at(std::size_t ring, std::size_t column) noexcept { return q[ring * kColumns + column]; }
  double at(std::size_t ring, std::size_t column) const noexcept { return q[ring * kColumns + column]; }
  friend bool operator==(const EventGrid&, const EventGrid&) = default;
};

/// Log-scaled grid with values in [0, 1]; `shift` is the column rotation that
/// center_columns applied (0 when not centered).
struct PreprocessedGrid {
  std::array<double, kPmts> values{};
  bool centered = false;
  std::size_t shift = 0;

  double& at(std::size_t ring, std::size_t column) noexcept { return values[ring * kColumns + column]; }
  double at(std::size_t ring, std::size_t column) const noexcept { return values[ring * kColumns + column]; }
  friend bool operator==(const PreprocessedGrid&, const PreprocessedGrid&) = default;
};

/// Raw events with their labels, index-aligned.
struct Dataset {
  std::vector<EventGrid> grids;
  std::vector<EventLabel> labels;

  std::size_t size() const noexcept { return grids.size(); }
};

struct PreparedDataset {
  std::vector<PreprocessedGrid> grids;
  std::vector<EventLabel> labels;

  std::size_t size() const noexcept { return grids.size(); }
};

}  // namespace pmtnet
