#include "expconc/plot.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace expconc::plot {
namespace {

constexpr double kWidth = 640.0;
constexpr double kHeight = 420.0;
constexpr double kLeft = 70.0;
constexpr double kRight = 170.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 50.0;

const char* const kColours[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2"};

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

std::string fixed(double x) {
  std::ostringstream s;
  s.setf(std::ios::fixed);
  s.precision(2);
  s << x;
  return s.str();
}

std::string tick_label(double v) {
  std::ostringstream s;
  s.precision(3);
  s << v;
  return s.str();
}

}  // namespace

std::string render_svg(const Figure& figure) {
  auto usable = [&](double x, double y) { return std::isfinite(x) && std::isfinite(y) && (!figure.log_y || y > 0.0); };
  double x_lo = std::numeric_limits<double>::infinity(), x_hi = -x_lo;
  double y_lo = x_lo, y_hi = -x_lo;
  for (const auto& s : figure.series) {
    for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i) {
      if (!usable(s.x[i], s.y[i])) continue;
      const double y = figure.log_y ? std::log10(s.y[i]) : s.y[i];
      x_lo = std::min(x_lo, s.x[i]);
      x_hi = std::max(x_hi, s.x[i]);
      y_lo = std::min(y_lo, y);
      y_hi = std::max(y_hi, y);
    }
  }
  if (!std::isfinite(x_lo)) {
    x_lo = 0.0, x_hi = 1.0, y_lo = 0.0, y_hi = 1.0;
  }
  if (figure.log_y) {
    y_lo = std::max(std::floor(y_lo), std::ceil(y_hi) - 12.0);
    y_hi = std::ceil(y_hi);
  }
  if (x_hi <= x_lo) x_hi = x_lo + 1.0;
  if (y_hi <= y_lo) y_hi = y_lo + 1.0;

  const double pw = kWidth - kLeft - kRight;
  const double ph = kHeight - kTop - kBottom;
  auto px = [&](double x) { return kLeft + (x - x_lo) / (x_hi - x_lo) * pw; };
  auto py = [&](double y) {
    const double v = figure.log_y ? std::log10(y) : y;
    return kTop + (1.0 - (std::clamp(v, y_lo, y_hi) - y_lo) / (y_hi - y_lo)) * ph;
  };

  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << kLeft << "\" y=\"24\" font-size=\"14\">" << escape(figure.title) << "</text>\n";
  out << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << pw << "\" height=\"" << ph
      << "\" fill=\"none\" stroke=\"#444\"/>\n";

  for (int i = 0; i <= 4; ++i) {
    const double x = x_lo + (x_hi - x_lo) * i / 4.0;
    out << "<text x=\"" << fixed(px(x)) << "\" y=\"" << fixed(kTop + ph + 16) << "\" text-anchor=\"middle\">"
        << tick_label(x) << "</text>\n";
  }
  if (figure.log_y) {
    for (double e = y_lo; e <= y_hi; e += std::max(1.0, std::ceil((y_hi - y_lo) / 6.0))) {
      const double y = std::pow(10.0, e);
      out << "<line x1=\"" << kLeft << "\" x2=\"" << kLeft + pw << "\" y1=\"" << fixed(py(y)) << "\" y2=\""
          << fixed(py(y)) << "\" stroke=\"#ddd\"/>\n";
      out << "<text x=\"" << kLeft - 6 << "\" y=\"" << fixed(py(y) + 4) << "\" text-anchor=\"end\">1e"
          << static_cast<int>(e) << "</text>\n";
    }
  } else {
    for (int i = 0; i <= 4; ++i) {
      const double y = y_lo + (y_hi - y_lo) * i / 4.0;
      out << "<text x=\"" << kLeft - 6 << "\" y=\"" << fixed(py(y) + 4) << "\" text-anchor=\"end\">"
          << tick_label(y) << "</text>\n";
    }
  }
  out << "<text x=\"" << fixed(kLeft + pw / 2) << "\" y=\"" << kHeight - 12 << "\" text-anchor=\"middle\">"
      << escape(figure.x_label) << "</text>\n";
  out << "<text transform=\"translate(16," << fixed(kTop + ph / 2) << ") rotate(-90)\" text-anchor=\"middle\">"
      << escape(figure.y_label) << (figure.log_y ? " (log scale)" : "") << "</text>\n";

  for (std::size_t k = 0; k < figure.series.size(); ++k) {
    const auto& s = figure.series[k];
    const char* colour = kColours[k % std::size(kColours)];
    out << "<polyline fill=\"none\" stroke=\"" << colour << "\" stroke-width=\"1.5\""
        << (s.dashed ? " stroke-dasharray=\"6,4\"" : "") << " points=\"";
    bool first = true;
    for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i) {
      if (!usable(s.x[i], s.y[i])) continue;
      out << (first ? "" : " ") << fixed(px(s.x[i])) << "," << fixed(py(s.y[i]));
      first = false;
    }
    out << "\"/>\n";
    const double ly = kTop + 14.0 + 18.0 * static_cast<double>(k);
    out << "<line x1=\"" << kLeft + pw + 10 << "\" x2=\"" << kLeft + pw + 30 << "\" y1=\"" << ly << "\" y2=\"" << ly
        << "\" stroke=\"" << colour << "\" stroke-width=\"1.5\"" << (s.dashed ? " stroke-dasharray=\"6,4\"" : "")
        << "/>\n";
    out << "<text x=\"" << kLeft + pw + 34 << "\" y=\"" << ly + 4 << "\">" << escape(s.name) << "</text>\n";
  }
  out << "</svg>\n";
  return out.str();
}

}  // namespace expconc::plot
