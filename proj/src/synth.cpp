#include "pmtnet/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "pmtnet/errors.hpp"

namespace pmtnet {

namespace {

constexpr double kColumnsD = static_cast<double>(kColumns);

double draw(Prng& prng, const Range& r) { return prng.uniform(r.lo, r.hi); }

double periodic_offset(double d) { return d - kColumnsD * std::round(d / kColumnsD); }

// Gaussian blob in the local frame, truncated at 3 sigma so that it has
// compact support.
void add_blob(EventGrid& g, double row, double col, double sigma, double amplitude) {
  const double cutoff2 = 9.0 * sigma * sigma;
  for (std::size_t i = 0; i < kRings; ++i)
    for (std::size_t l = 0; l < kColumns; ++l) {
      const double dr = static_cast<double>(i) - row;
      const double dc = periodic_offset(static_cast<double>(l) - col);
      const double d2 = dr * dr + dc * dc;
      if (d2 <= cutoff2) g.at(i, l) += amplitude * std::exp(-d2 / (2.0 * sigma * sigma));
    }
}

void add_muon(EventGrid& g, const SynthConfig& cfg, Prng& prng) {
  const std::size_t span = cfg.muon_min_span + prng.below(kColumns - cfg.muon_min_span + 1);
  const double r0 = prng.uniform(0.0, kRings - 1.0);
  const double r1 = prng.uniform(0.0, kRings - 1.0);
  const double sigma = 0.5 * draw(prng, cfg.muon_width);
  const double amplitude = draw(prng, cfg.muon_amplitude);
  const double halo = draw(prng, cfg.muon_halo);
  for (double& q : g.q) q += halo * prng.uniform(0.8, 1.2);
  for (std::size_t l = 0; l < span; ++l) {
    const double t = span > 1 ? static_cast<double>(l) / static_cast<double>(span - 1) : 0.0;
    const double row = r0 + (r1 - r0) * t;
    // per-PMT light yield fluctuation along the track
    const double yield = amplitude * prng.uniform(0.8, 1.2);
    for (std::size_t i = 0; i < kRings; ++i) {
      const double dr = static_cast<double>(i) - row;
      if (std::abs(dr) <= 3.0 * sigma + 0.5) g.at(i, l) += yield * std::exp(-dr * dr / (2.0 * sigma * sigma));
    }
  }
}

void add_flasher(EventGrid& g, const SynthConfig& cfg, Prng& prng) {
  const std::size_t hot_row = prng.below(kRings);
  g.at(hot_row, 0) += draw(prng, cfg.flasher_hot);
  const double row = prng.uniform(0.0, kRings - 1.0);
  const double sigma = draw(prng, cfg.flasher_blob_width);
  add_blob(g, row, kColumnsD / 2.0, sigma, draw(prng, cfg.flasher_blob_amplitude));
}

void add_ibd(EventGrid& g, const Range& amplitude, const Range& width, Prng& prng) {
  const double row = prng.uniform(0.0, kRings - 1.0);
  const double col = prng.uniform(-0.5, 0.5);
  const double sigma = draw(prng, width);
  const double charge = draw(prng, amplitude);
  add_blob(g, row, col, sigma, charge / (2.0 * 3.14159265358979323846 * sigma * sigma));
}

void add_other(EventGrid& g, const SynthConfig& cfg, Prng& prng) {
  const std::size_t sites = cfg.other_sites_min + prng.below(cfg.other_sites_max - cfg.other_sites_min + 1);
  for (std::size_t s = 0; s < sites; ++s) {
    const std::size_t row = prng.below(kRings);
    const std::size_t col = prng.below(kColumns);
    g.at(row, col) += draw(prng, cfg.other_amplitude);
  }
}

void check_range(const Range& r, const char* name, bool strictly_positive) {
  const bool ok = std::isfinite(r.lo) && std::isfinite(r.hi) && r.lo <= r.hi && (strictly_positive ? r.lo > 0 : r.lo >= 0);
  if (!ok) throw ConfigError(std::string("invalid range for ") + name);
}

Dataset generate_stream(const SynthConfig& cfg, const std::array<std::size_t, kNumClasses>& counts, std::uint64_t stream) {
  cfg.validate();
  for (std::size_t c = 0; c < kNumClasses; ++c)
    if (counts[c] == 0) throw DataError(std::string("zero events requested for class ") + std::string(label_name(kAllLabels[c])));
  const Prng master = Prng(cfg.seed).substream(stream);
  std::vector<EventLabel> labels;
  for (std::size_t c = 0; c < kNumClasses; ++c) labels.insert(labels.end(), counts[c], kAllLabels[c]);
  Prng order = master.substream(0);
  order.shuffle(labels);

  Dataset ds;
  ds.labels = labels;
  ds.grids.reserve(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    Prng prng = master.substream(i + 1);
    ds.grids.push_back(generate_event(labels[i], cfg, prng));
  }
  return ds;
}

}  // namespace

void SynthConfig::validate() const {
  check_range(muon_amplitude, "muon_amplitude", true);
  check_range(muon_width, "muon_width", true);
  check_range(muon_halo, "muon_halo", false);
  check_range(flasher_hot, "flasher_hot", true);
  check_range(flasher_blob_amplitude, "flasher_blob_amplitude", true);
  check_range(flasher_blob_width, "flasher_blob_width", true);
  check_range(delay_amplitude, "delay_amplitude", true);
  check_range(delay_width, "delay_width", true);
  check_range(prompt_amplitude, "prompt_amplitude", true);
  check_range(prompt_width, "prompt_width", true);
  check_range(other_amplitude, "other_amplitude", false);
  check_range(spurious_charge, "spurious_charge", false);
  if (flasher_blob_width.hi > 3.5) throw ConfigError("flasher blob must stay clear of the hot PMT (width <= 3.5)");
  if (muon_min_span < 1 || muon_min_span > kColumns) throw ConfigError("muon_min_span must lie in [1, 24]");
  if (other_sites_min > other_sites_max || other_sites_max == 0) throw ConfigError("invalid other site counts");
  if (!(noise_level >= 0.0) || !std::isfinite(noise_level)) throw ConfigError("noise_level must be >= 0");
  if (!(gain_spread >= 0.0 && gain_spread < 1.0)) throw ConfigError("gain_spread must lie in [0, 1)");
  if (prompt_amplitude.hi < delay_amplitude.lo || delay_amplitude.hi < prompt_amplitude.lo)
    throw ConfigError("prompt and delay amplitude ranges must overlap");
}

SynthConfig SynthConfig::supervised_preset() { return SynthConfig{}; }

SynthConfig SynthConfig::unsupervised_preset() {
  SynthConfig cfg;
  cfg.counts = {634, 634, 634, 634, 634};
  cfg.test_counts = {158, 158, 158, 158, 158};
  return cfg;
}

EventRecipe sample_event(EventLabel label, const SynthConfig& cfg, Prng& prng) {
  EventRecipe r;
  r.label = label;
  r.anchor_column = prng.below(kColumns);
  switch (label) {
    case EventLabel::Muon: add_muon(r.pattern, cfg, prng); break;
    case EventLabel::Flasher: add_flasher(r.pattern, cfg, prng); break;
    case EventLabel::IBDPrompt: add_ibd(r.pattern, cfg.prompt_amplitude, cfg.prompt_width, prng); break;
    case EventLabel::IBDDelay: add_ibd(r.pattern, cfg.delay_amplitude, cfg.delay_width, prng); break;
    case EventLabel::Other: add_other(r.pattern, cfg, prng); break;
  }
  if (cfg.gain_spread > 0.0)
    for (double& q : r.pattern.q) q *= prng.uniform(1.0 - cfg.gain_spread, 1.0 + cfg.gain_spread);
  if (cfg.noise_level > 0.0) {
    for (double& q : r.noise.q) q = prng.exponential(cfg.noise_level);
    const std::size_t hits = prng.below(cfg.spurious_hits_max + 1);
    for (std::size_t h = 0; h < hits; ++h) r.noise.q[prng.below(kPmts)] += draw(prng, cfg.spurious_charge);
  }
  return r;
}

EventGrid rotate_columns(const EventGrid& grid, std::size_t k) {
  EventGrid out;
  for (std::size_t i = 0; i < kRings; ++i)
    for (std::size_t j = 0; j < kColumns; ++j) out.at(i, (j + k) % kColumns) = grid.at(i, j);
  return out;
}

EventGrid render_event(const EventRecipe& recipe) {
  EventGrid local;
  for (std::size_t p = 0; p < kPmts; ++p)
    local.q[p] = std::clamp(recipe.pattern.q[p] + recipe.noise.q[p], 0.0, kMaxCharge);
  return rotate_columns(local, recipe.anchor_column % kColumns);
}

EventGrid generate_event(EventLabel label, const SynthConfig& cfg, Prng& prng) {
  return render_event(sample_event(label, cfg, prng));
}

Dataset generate_dataset(const SynthConfig& cfg) { return generate_stream(cfg, cfg.counts, 0); }

Dataset generate_test_dataset(const SynthConfig& cfg) { return generate_stream(cfg, cfg.test_counts, 1); }

}  // namespace pmtnet
