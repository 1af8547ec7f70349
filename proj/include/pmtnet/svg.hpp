#pragma once

#include <span>
#include <string>
#include <vector>

#include "pmtnet/event.hpp"
#include "pmtnet/tsne.hpp"

namespace pmtnet {

/// Fixed per-class colour, "#rrggbb".
std::string class_color(EventLabel label);

/// Scatter of the first two embedding coordinates: one <circle> per point in
/// input order, coloured by class, plus a legend drawn with <rect>/<text>.
std::string render_scatter_svg(const Embedding& e, std::span<const EventLabel> labels, const std::string& title);

struct ReconstructionPanel {
  PreprocessedGrid input;
  PreprocessedGrid reconstruction;
  EventLabel label = EventLabel::Other;
  std::size_t index = 0;
  double sse = 0.0;
};

/// One column per panel: the input heat map above its reconstruction, each an
/// 8 x 24 grid of <rect class="cell"> on a shared [0, 1] colour scale.
std::string render_reconstruction_svg(std::span<const ReconstructionPanel> panels);

}  // namespace pmtnet
