#pragma once

#include <span>
#include <string>
#include <vector>

namespace beamobs {

struct PlotSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  /// Draw dots instead of a polyline.
  bool markers = false;
};

struct PlotSpec {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_y = false;
  int width = 760;
  int height = 460;
};

/// Static SVG with axes, ticks and a legend. Non-finite points (and
/// non-positive ones on a log axis) break the line instead of being drawn.
std::string RenderPlot(const PlotSpec& spec, std::span<const PlotSeries> series);

}  // namespace beamobs
