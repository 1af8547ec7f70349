#include "pmtnet/svg.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>

#include "pmtnet/errors.hpp"

namespace pmtnet {

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string hex(int r, int g, int b) {
  char buf[8];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", r, g, b);
  return buf;
}

// Piecewise-linear viridis approximation on [0, 1].
std::string ramp(double v) {
  static constexpr std::array<std::array<int, 3>, 5> stops{{
      {68, 1, 84}, {59, 82, 139}, {33, 145, 140}, {94, 201, 98}, {253, 231, 37}}};
  v = std::clamp(std::isfinite(v) ? v : 0.0, 0.0, 1.0);
  const double pos = v * (stops.size() - 1);
  const std::size_t i = std::min<std::size_t>(static_cast<std::size_t>(pos), stops.size() - 2);
  const double t = pos - static_cast<double>(i);
  std::array<int, 3> c{};
  for (int k = 0; k < 3; ++k)
    c[k] = static_cast<int>(std::lround(stops[i][k] + t * (stops[i + 1][k] - stops[i][k])));
  return hex(c[0], c[1], c[2]);
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

std::string class_color(EventLabel label) {
  switch (label) {
    case EventLabel::Muon: return "#d62728";
    case EventLabel::Flasher: return "#ff7f0e";
    case EventLabel::IBDPrompt: return "#1f77b4";
    case EventLabel::IBDDelay: return "#2ca02c";
    case EventLabel::Other: return "#7f7f7f";
  }
  return "#000000";
}

std::string render_scatter_svg(const Embedding& e, std::span<const EventLabel> labels, const std::string& title) {
  if (labels.size() != e.n) throw DataError("embedding and labels differ in length");
  constexpr double kSize = 600.0, kMargin = 40.0, kLegend = 140.0;
  double xmin = 0, xmax = 1, ymin = 0, ymax = 1;
  if (e.n > 0) {
    xmin = xmax = e.at(0, 0);
    ymin = ymax = e.at(0, 1);
    for (std::size_t i = 1; i < e.n; ++i) {
      xmin = std::min(xmin, e.at(i, 0));
      xmax = std::max(xmax, e.at(i, 0));
      ymin = std::min(ymin, e.at(i, 1));
      ymax = std::max(ymax, e.at(i, 1));
    }
  }
  const double xr = xmax > xmin ? xmax - xmin : 1.0;
  const double yr = ymax > ymin ? ymax - ymin : 1.0;
  const double span = kSize - 2 * kMargin;

  std::string s;
  s += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fmt(kSize + kLegend) + "\" height=\"" + fmt(kSize) +
       "\" viewBox=\"0 0 " + fmt(kSize + kLegend) + " " + fmt(kSize) + "\">\n";
  s += "<rect x=\"0\" y=\"0\" width=\"" + fmt(kSize + kLegend) + "\" height=\"" + fmt(kSize) + "\" fill=\"#ffffff\"/>\n";
  s += "<text x=\"" + fmt(kMargin) + "\" y=\"24\" font-family=\"sans-serif\" font-size=\"16\">" + escape(title) + "</text>\n";
  s += "<g id=\"points\">\n";
  for (std::size_t i = 0; i < e.n; ++i) {
    const double cx = kMargin + (e.at(i, 0) - xmin) / xr * span;
    const double cy = kSize - kMargin - (e.at(i, 1) - ymin) / yr * span;
    s += "<circle cx=\"" + fmt(cx) + "\" cy=\"" + fmt(cy) + "\" r=\"2.5\" fill=\"" + class_color(labels[i]) +
         "\" fill-opacity=\"0.8\"/>\n";
  }
  s += "</g>\n<g id=\"legend\" font-family=\"sans-serif\" font-size=\"13\">\n";
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    const double y = kMargin + 22.0 * static_cast<double>(c);
    s += "<rect x=\"" + fmt(kSize) + "\" y=\"" + fmt(y) + "\" width=\"12\" height=\"12\" fill=\"" +
         class_color(kAllLabels[c]) + "\"/>\n";
    s += "<text x=\"" + fmt(kSize + 18) + "\" y=\"" + fmt(y + 11) + "\">" + std::string(label_name(kAllLabels[c])) +
         "</text>\n";
  }
  s += "</g>\n</svg>\n";
  return s;
}

std::string render_reconstruction_svg(std::span<const ReconstructionPanel> panels) {
  constexpr double kCell = 10.0, kGap = 30.0, kTop = 40.0;
  const double grid_w = kCell * kColumns, grid_h = kCell * kRings;
  const double width = kGap + static_cast<double>(panels.size()) * (grid_w + kGap);
  const double height = kTop + 2 * grid_h + 3 * kGap;

  std::string s;
  s += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fmt(width) + "\" height=\"" + fmt(height) +
       "\" viewBox=\"0 0 " + fmt(width) + " " + fmt(height) + "\">\n";
  s += "<rect x=\"0\" y=\"0\" width=\"" + fmt(width) + "\" height=\"" + fmt(height) + "\" fill=\"#ffffff\"/>\n";
  for (std::size_t k = 0; k < panels.size(); ++k) {
    const auto& p = panels[k];
    const double x0 = kGap + static_cast<double>(k) * (grid_w + kGap);
    s += "<text x=\"" + fmt(x0) + "\" y=\"24\" font-family=\"sans-serif\" font-size=\"12\">#" +
         std::to_string(p.index) + " " + std::string(label_name(p.label)) + "  SSE " + fmt(p.sse) + "</text>\n";
    const auto grid = [&](const PreprocessedGrid& g, double y0, const char* role) {
      s += "<g class=\"" + std::string(role) + "\">\n";
      for (std::size_t i = 0; i < kRings; ++i)
        for (std::size_t j = 0; j < kColumns; ++j)
          s += "<rect class=\"cell\" x=\"" + fmt(x0 + kCell * j) + "\" y=\"" + fmt(y0 + kCell * i) + "\" width=\"" +
               fmt(kCell) + "\" height=\"" + fmt(kCell) + "\" fill=\"" + ramp(g.at(i, j)) + "\"/>\n";
      s += "</g>\n";
    };
    grid(p.input, kTop, "input");
    grid(p.reconstruction, kTop + grid_h + kGap, "reconstruction");
  }
  s += "</svg>\n";
  return s;
}

}  // namespace pmtnet
