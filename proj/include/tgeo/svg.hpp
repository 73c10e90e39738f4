#pragma once

#include <string>
#include <vector>

namespace tgeo {

/// One polyline. Series i is drawn with CSS class `series-i`.
struct PlotSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  bool closed = false;
};

struct PlotOptions {
  std::string title;
  std::string x_label;
  std::string y_label;
  /// One data unit has the same length on both axes (for plane curves).
  bool equal_aspect = false;
  int width = 640;
  int height = 480;
};

/// Deterministic SVG document. Path coordinates are written in data units
/// (%.10f) inside a transformed group, so they can be read back exactly.
/// Throws EmptySeries when there is nothing to plot.
std::string export_svg(const std::vector<PlotSeries>& series, const PlotOptions& options = {});

}  // namespace tgeo
