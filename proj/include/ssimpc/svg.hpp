#pragma once

#include <string>
#include <vector>

namespace ssimpc {

/// One data series of a plot. Drawn as a polyline unless points_only, in
/// which case markers are drawn at each sample.
struct PlotSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  std::string color = "#1f6fb2";
  bool points_only = false;
};

struct PlotSpec {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_x = false;
  bool log_y = false;
  std::vector<PlotSeries> series;
  std::vector<std::string> annotations;  // rendered under the legend
};

/// Renders a self-contained SVG document: axes with ticks, series lines or
/// markers, a legend, and optional annotation lines. Output bytes depend
/// only on the spec (no timestamps or environment), so identical specs
/// render identically. Non-positive samples are dropped on log axes; a
/// series with no drawable samples is skipped. Throws when no series has
/// any drawable sample.
std::string render_plot(const PlotSpec& spec);

}  // namespace ssimpc
