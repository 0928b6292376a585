#ifndef KIDLEX_CHARTS_HPP
#define KIDLEX_CHARTS_HPP

// Minimal SVG bar charts: one chart per metric, one bar per model/corpus, with
// an arrow beside the axis pointing in the direction of improvement.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "kidlex/util.hpp"

namespace kidlex::charts {

struct BarChart {
  std::string title;
  bool higher_is_better = true;
  std::vector<std::pair<std::string, double>> bars;
};

inline std::string xml_escape(std::string_view s) {
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

inline std::string render_svg(const BarChart& chart) {
  const double bar_w = 60, gap = 24, left = 70, top = 50, plot_h = 240, bottom = 60;
  const double width = left + gap + static_cast<double>(chart.bars.size()) * (bar_w + gap) + 40;
  const double height = top + plot_h + bottom;

  double lo = 0, hi = 0;
  for (const auto& [_, v] : chart.bars) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  if (hi == lo) hi = lo + 1;
  const auto y_of = [&](double v) { return top + plot_h * (hi - v) / (hi - lo); };

  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + util::fixed(width, 0) +
         "\" height=\"" + util::fixed(height, 0) + "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg += "<text x=\"" + util::fixed(width / 2, 1) + "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">" +
         xml_escape(chart.title) + "</text>\n";
  // Axes and the improvement arrow.
  svg += "<line x1=\"" + util::fixed(left, 1) + "\" y1=\"" + util::fixed(top, 1) + "\" x2=\"" +
         util::fixed(left, 1) + "\" y2=\"" + util::fixed(top + plot_h, 1) + "\" stroke=\"black\"/>\n";
  svg += "<line x1=\"" + util::fixed(left, 1) + "\" y1=\"" + util::fixed(y_of(0), 1) + "\" x2=\"" +
         util::fixed(width - 20, 1) + "\" y2=\"" + util::fixed(y_of(0), 1) + "\" stroke=\"black\"/>\n";
  const double ax = 30, a_top = top + 20, a_bot = top + plot_h - 20;
  const double tip = chart.higher_is_better ? a_top : a_bot;
  const double tail = chart.higher_is_better ? a_bot : a_top;
  const double head = chart.higher_is_better ? 10 : -10;
  svg += "<g class=\"improvement\" data-direction=\"" +
         std::string(chart.higher_is_better ? "up" : "down") + "\" stroke=\"gray\" fill=\"gray\">";
  svg += "<line x1=\"" + util::fixed(ax, 1) + "\" y1=\"" + util::fixed(tail, 1) + "\" x2=\"" +
         util::fixed(ax, 1) + "\" y2=\"" + util::fixed(tip, 1) + "\" stroke-width=\"3\"/>";
  svg += "<polygon points=\"" + util::fixed(ax - 7, 1) + "," + util::fixed(tip + head, 1) + " " +
         util::fixed(ax + 7, 1) + "," + util::fixed(tip + head, 1) + " " + util::fixed(ax, 1) + "," +
         util::fixed(tip, 1) + "\"/></g>\n";

  for (std::size_t i = 0; i < chart.bars.size(); ++i) {
    const auto& [label, v] = chart.bars[i];
    const double x = left + gap + static_cast<double>(i) * (bar_w + gap);
    const double y0 = y_of(0), y1 = y_of(v);
    svg += "<rect x=\"" + util::fixed(x, 1) + "\" y=\"" + util::fixed(std::min(y0, y1), 1) +
           "\" width=\"" + util::fixed(bar_w, 1) + "\" height=\"" + util::fixed(std::abs(y1 - y0), 1) +
           "\" fill=\"steelblue\"/>\n";
    svg += "<text x=\"" + util::fixed(x + bar_w / 2, 1) + "\" y=\"" +
           util::fixed(std::min(y0, y1) - 4, 1) + "\" text-anchor=\"middle\">" + util::fixed(v, 2) +
           "</text>\n";
    svg += "<text x=\"" + util::fixed(x + bar_w / 2, 1) + "\" y=\"" +
           util::fixed(top + plot_h + 20, 1) + "\" text-anchor=\"middle\">" + xml_escape(label) +
           "</text>\n";
  }
  svg += "</svg>\n";
  return svg;
}

// Writes <dir>/<slug>.svg and returns the path.
inline std::string write_svg(const BarChart& chart, const std::string& dir, const std::string& slug) {
  std::filesystem::create_directories(dir);
  const std::string path = (std::filesystem::path(dir) / (slug + ".svg")).string();
  util::write_file(path, render_svg(chart));
  return path;
}

}  // namespace kidlex::charts

#endif  // KIDLEX_CHARTS_HPP
