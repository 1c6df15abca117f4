#pragma once

#include <optional>
#include <string>
#include <vector>

namespace dbflu {

// Bare-bones static SVG charts for the plot-data command. One x/y series
// per entry; drawn as a polyline unless points_only is set.
struct SvgSeries {
  std::vector<double> x;
  std::vector<double> y;
  std::string color = "#555555";
  bool points_only = false;
  double width = 1.0;
};

struct SvgChartSpec {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<SvgSeries> series;
  std::optional<double> hline;  // horizontal reference line (e.g. a baseline)
  int width_px = 720;
  int height_px = 440;
};

void write_svg_chart(const SvgChartSpec& spec, const std::string& path);

}  // namespace dbflu
