#pragma once

#include <array>
#include <cstdint>

#include "pmtnet/event.hpp"
#include "pmtnet/tensor.hpp"

namespace pmtnet {

/// Largest charge the generator emits: ln(1 + q) / 10 stays <= 1.
inline constexpr double kMaxCharge = 22025.465794806718;  // e^10 - 1

struct Range {
  double lo = 0.0;
  double hi = 0.0;
  friend bool operator==(const Range&, const Range&) = default;
};

/// Class phenomenology of the synthetic detector. Charges are in arbitrary
/// units; widths are Gaussian sigmas in PMT pitches.
struct SynthConfig {
  // Muon: a track of near-constant charge along >= muon_min_span columns.
  Range muon_amplitude{1000.0, 10000.0};
  Range muon_width{1.0, 2.0};  // track width in rings (sigma = width / 2)
  std::size_t muon_min_span = 12;
  Range muon_halo{200.0, 1000.0};  // diffuse scintillation light on every PMT

  // Flasher: one hot PMT plus a dim blob on the opposite side of the cylinder.
  Range flasher_hot{100.0, 1000.0};
  Range flasher_blob_amplitude{8.0, 40.0};
  Range flasher_blob_width{1.0, 2.0};

  // IBD: a compact blob. Prompt and delay amplitude ranges overlap.
  // Amplitudes are integrated blob charge.
  Range delay_amplitude{1700.0, 4000.0};
  Range delay_width{0.8, 2.5};
  Range prompt_amplitude{100.0, 2000.0};
  Range prompt_width{0.8, 2.5};

  // Other: a handful of isolated low-charge PMTs.
  Range other_amplitude{0.0, 30.0};
  std::size_t other_sites_min = 3;
  std::size_t other_sites_max = 8;

  double noise_level = 1.0;  // mean of the per-PMT exponential noise
  // Isolated spurious hits added to every class (dark noise, afterpulses);
  // part of the noise, so noise_level = 0 removes them too.
  std::size_t spurious_hits_max = 6;  // count drawn uniformly from [0, max]
  Range spurious_charge{10.0, 100.0};
  double gain_spread = 0.3;  // per-PMT gain drawn from U(1 - s, 1 + s), applied to the pattern
  std::uint64_t seed = 1;
  std::array<std::size_t, kNumClasses> counts{900, 900, 900, 900, 900};
  std::array<std::size_t, kNumClasses> test_counts{300, 300, 300, 300, 300};

  /// Throws ConfigError on empty or negative ranges, or when the prompt and
  /// delay amplitude ranges do not overlap.
  void validate() const;

  /// 4,500 train / 1,500 test events, balanced.
  static SynthConfig supervised_preset();
  /// 3,170 train / 790 test events, balanced.
  static SynthConfig unsupervised_preset();
};

/// A sampled event in its own frame: `anchor_column` is where local column 0
/// lands on the detector. Rendering rotates pattern + noise by the anchor, so
/// moving the anchor by k is exactly a cyclic column shift by k.
struct EventRecipe {
  EventLabel label = EventLabel::Other;
  std::size_t anchor_column = 0;
  EventGrid pattern;  // noise-free charge, local frame
  EventGrid noise;    // per-PMT noise, local frame
};

EventRecipe sample_event(EventLabel label, const SynthConfig& cfg, Prng& prng);
/// (pattern + noise) rotated into the detector frame, clamped to [0, kMaxCharge].
EventGrid render_event(const EventRecipe& recipe);
EventGrid generate_event(EventLabel label, const SynthConfig& cfg, Prng& prng);

/// Moves column j to column (j + k) mod 24.
EventGrid rotate_columns(const EventGrid& grid, std::size_t k);

/// cfg.counts events per class, shuffled. Event i is drawn from its own
/// substream of the seed, so the output depends only on cfg.
Dataset generate_dataset(const SynthConfig& cfg);
/// Same recipe with cfg.test_counts on an independent stream.
Dataset generate_test_dataset(const SynthConfig& cfg);

}  // namespace pmtnet
