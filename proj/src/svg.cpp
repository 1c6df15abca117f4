#include "dbflu/svg.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>

namespace dbflu {

void write_svg_chart(const SvgChartSpec& spec, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_svg_chart: cannot open " + path);

  double x_min = std::numeric_limits<double>::infinity(), x_max = -x_min;
  double y_min = x_min, y_max = -x_min;
  for (const auto& s : spec.series) {
    for (double v : s.x) {
      x_min = std::min(x_min, v);
      x_max = std::max(x_max, v);
    }
    for (double v : s.y) {
      y_min = std::min(y_min, v);
      y_max = std::max(y_max, v);
    }
  }
  if (spec.hline) {
    y_min = std::min(y_min, *spec.hline);
    y_max = std::max(y_max, *spec.hline);
  }
  if (!std::isfinite(x_min) || !std::isfinite(y_min)) {
    x_min = y_min = 0.0;
    x_max = y_max = 1.0;
  }
  if (x_max == x_min) x_max = x_min + 1.0;
  if (y_max == y_min) y_max = y_min + 1.0;

  const double ml = 60, mr = 20, mt = 40, mb = 50;
  const double pw = spec.width_px - ml - mr;
  const double ph = spec.height_px - mt - mb;
  auto px = [&](double x) { return ml + (x - x_min) / (x_max - x_min) * pw; };
  auto py = [&](double y) { return mt + (1.0 - (y - y_min) / (y_max - y_min)) * ph; };

  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << spec.width_px << "\" height=\"" << spec.height_px
      << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << spec.width_px / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">" << spec.title
      << "</text>\n";
  out << "<line x1=\"" << ml << "\" y1=\"" << mt + ph << "\" x2=\"" << ml + pw << "\" y2=\"" << mt + ph
      << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\"" << mt + ph
      << "\" stroke=\"black\"/>\n";
  out << "<text x=\"" << spec.width_px / 2 << "\" y=\"" << spec.height_px - 12
      << "\" text-anchor=\"middle\" font-size=\"12\">" << spec.x_label << "</text>\n";
  out << "<text x=\"16\" y=\"" << mt + ph / 2 << "\" text-anchor=\"middle\" font-size=\"12\" transform=\"rotate(-90 16 "
      << mt + ph / 2 << ")\">" << spec.y_label << "</text>\n";
  for (int i = 0; i <= 4; ++i) {
    const double xv = x_min + (x_max - x_min) * i / 4.0;
    const double yv = y_min + (y_max - y_min) * i / 4.0;
    out << "<text x=\"" << px(xv) << "\" y=\"" << mt + ph + 16 << "\" text-anchor=\"middle\" font-size=\"10\">" << xv
        << "</text>\n";
    out << "<text x=\"" << ml - 6 << "\" y=\"" << py(yv) + 3 << "\" text-anchor=\"end\" font-size=\"10\">" << yv
        << "</text>\n";
  }
  if (spec.hline) {
    out << "<line x1=\"" << ml << "\" y1=\"" << py(*spec.hline) << "\" x2=\"" << ml + pw << "\" y2=\""
        << py(*spec.hline) << "\" stroke=\"#999999\" stroke-dasharray=\"4 3\"/>\n";
  }
  for (const auto& s : spec.series) {
    if (s.points_only) {
      for (std::size_t i = 0; i < s.x.size(); ++i) {
        out << "<circle cx=\"" << px(s.x[i]) << "\" cy=\"" << py(s.y[i]) << "\" r=\"2.5\" fill=\"" << s.color
            << "\"/>\n";
      }
    } else {
      out << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"" << s.width << "\" points=\"";
      for (std::size_t i = 0; i < s.x.size(); ++i) out << px(s.x[i]) << ',' << py(s.y[i]) << ' ';
      out << "\"/>\n";
    }
  }
  out << "</svg>\n";
}

}  // namespace dbflu
