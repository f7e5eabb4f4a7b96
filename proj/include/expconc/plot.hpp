#pragma once

#include <string>
#include <vector>

namespace expconc::plot {

struct Series {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
  /// Dashed stroke, used for bound curves.
  bool dashed = false;
};

struct Figure {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_y = false;
  std::vector<Series> series;
};

/// Standalone SVG line chart. On a log axis, points with y <= 0 are skipped.
std::string render_svg(const Figure& figure);

}  // namespace expconc::plot
