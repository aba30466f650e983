// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

namespace kpzlab {

struct PlotSeries {
  std::string label;
  std::vector<double> x, y;
  bool line = false;  // points otherwise
};

// y = intercept + slope * x, drawn across the x range.
struct ReferenceLine {
  std::string label;
  double slope = 0, intercept = 0;
};

struct HorizontalLine {
  std::string label;
  double y = 0;
};

struct PlotSpec {
  std::string title, xlabel, ylabel;
  std::vector<PlotSeries> series;
  std::vector<ReferenceLine> references;
  std::vector<HorizontalLine> levels;
  int width = 640, height = 420;
};

// Static SVG with axes, ticks and a legend. Throws when no series holds a
// finite point.
std::string render_svg(const PlotSpec& spec);
void emit_plot(const PlotSpec& spec, const std::string& path);

}  // namespace kpzlab
