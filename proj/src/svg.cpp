#include "tgeo/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "tgeo/errors.hpp"

namespace tgeo {
namespace {

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"};
constexpr int kMarginLeft = 70, kMarginRight = 20, kMarginTop = 40, kMarginBottom = 50;

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

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

// Tick positions at 1, 2 or 5 times a power of ten, about five per axis.
std::vector<double> ticks(double lo, double hi) {
  const double raw = (hi - lo) / 5.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  const double frac = raw / mag;
  const double step = (frac < 1.5 ? 1.0 : frac < 3.5 ? 2.0 : frac < 7.5 ? 5.0 : 10.0) * mag;
  std::vector<double> out;
  for (double t = std::ceil(lo / step) * step; t <= hi + 1e-9 * step; t += step)
    out.push_back(std::abs(t) < 1e-12 * step ? 0.0 : t);
  return out;
}

}  // namespace

std::string export_svg(const std::vector<PlotSeries>& series, const PlotOptions& options) {
  double xmin = INFINITY, xmax = -INFINITY, ymin = INFINITY, ymax = -INFINITY;
  std::size_t points = 0;
  for (const auto& s : series) {
    if (s.x.size() != s.y.size())
      throw validation_error("InvalidSeries", "series '" + s.label + "' has mismatched x/y lengths");
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i]))
        throw validation_error("InvalidSeries", "series '" + s.label + "' has non-finite points");
      xmin = std::min(xmin, s.x[i]);
      xmax = std::max(xmax, s.x[i]);
      ymin = std::min(ymin, s.y[i]);
      ymax = std::max(ymax, s.y[i]);
    }
    points += s.x.size();
  }
  if (points == 0) throw validation_error("EmptySeries", "nothing to plot");

  // Pad degenerate and tight ranges.
  const auto widen = [](double& lo, double& hi) {
    const double span = hi - lo;
    const double pad = span > 0.0 ? 0.05 * span : std::max(0.5, 0.05 * std::abs(lo));
    lo -= pad;
    hi += pad;
  };
  widen(xmin, xmax);
  widen(ymin, ymax);

  const double pw = options.width - kMarginLeft - kMarginRight;
  const double ph = options.height - kMarginTop - kMarginBottom;
  double sx = pw / (xmax - xmin);
  double sy = ph / (ymax - ymin);
  if (options.equal_aspect) {
    const double s = std::min(sx, sy);
    const double cx = 0.5 * (xmin + xmax), cy = 0.5 * (ymin + ymax);
    sx = sy = s;
    xmin = cx - 0.5 * pw / s;
    xmax = cx + 0.5 * pw / s;
    ymin = cy - 0.5 * ph / s;
    ymax = cy + 0.5 * ph / s;
  }
  const auto px = [&](double x) { return kMarginLeft + (x - xmin) * sx; };
  const auto py = [&](double y) { return kMarginTop + (ymax - y) * sy; };

  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << options.width << "\" height=\"" << options.height
    << "\" viewBox=\"0 0 " << options.width << ' ' << options.height << "\">\n";
  o << "<style>\n  .axis { stroke: #000; stroke-width: 1; fill: none; }\n"
       "  .tick { font: 11px sans-serif; fill: #000; }\n"
       "  .label { font: 13px sans-serif; fill: #000; }\n";
  for (std::size_t i = 0; i < series.size(); ++i)
    o << "  .series-" << i << " { fill: none; stroke: " << kPalette[i % std::size(kPalette)]
      << "; stroke-width: 1.5; }\n";
  o << "</style>\n";
  o << "<rect x=\"0\" y=\"0\" width=\"" << options.width << "\" height=\"" << options.height
    << "\" fill=\"#fff\"/>\n";
  if (!options.title.empty())
    o << "<text class=\"label\" x=\"" << options.width / 2 << "\" y=\"20\" text-anchor=\"middle\">"
      << escape(options.title) << "</text>\n";

  const double x0 = kMarginLeft, x1 = kMarginLeft + pw, y0 = kMarginTop, y1 = kMarginTop + ph;
  o << "<rect class=\"axis\" x=\"" << x0 << "\" y=\"" << y0 << "\" width=\"" << pw << "\" height=\"" << ph
    << "\"/>\n";
  for (double t : ticks(xmin, xmax)) {
    const std::string x = fmt("%.3f", px(t));
    o << "<line class=\"axis\" x1=\"" << x << "\" y1=\"" << y1 << "\" x2=\"" << x << "\" y2=\"" << y1 + 5
      << "\"/><text class=\"tick\" x=\"" << x << "\" y=\"" << y1 + 18 << "\" text-anchor=\"middle\">"
      << fmt("%g", t) << "</text>\n";
  }
  for (double t : ticks(ymin, ymax)) {
    const std::string y = fmt("%.3f", py(t));
    o << "<line class=\"axis\" x1=\"" << x0 - 5 << "\" y1=\"" << y << "\" x2=\"" << x0 << "\" y2=\"" << y
      << "\"/><text class=\"tick\" x=\"" << x0 - 8 << "\" y=\"" << y << "\" text-anchor=\"end\" dy=\"4\">"
      << fmt("%g", t) << "</text>\n";
  }
  if (!options.x_label.empty())
    o << "<text class=\"label\" x=\"" << (x0 + x1) / 2 << "\" y=\"" << options.height - 10
      << "\" text-anchor=\"middle\">" << escape(options.x_label) << "</text>\n";
  if (!options.y_label.empty())
    o << "<text class=\"label\" x=\"16\" y=\"" << (y0 + y1) / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
      << (y0 + y1) / 2 << ")\">" << escape(options.y_label) << "</text>\n";

  // Data-space group: (x, y) -> (px(x), py(y)).
  o << "<g transform=\"matrix(" << fmt("%.10g", sx) << " 0 0 " << fmt("%.10g", -sy) << ' '
    << fmt("%.10g", px(0.0)) << ' ' << fmt("%.10g", py(0.0)) << ")\">\n";
  for (std::size_t i = 0; i < series.size(); ++i) {
    const auto& s = series[i];
    if (s.x.empty()) continue;
    o << "<path class=\"series-" << i << "\" vector-effect=\"non-scaling-stroke\" d=\"";
    for (std::size_t k = 0; k < s.x.size(); ++k)
      o << (k == 0 ? "M" : " L") << fmt("%.10f", s.x[k]) << ',' << fmt("%.10f", s.y[k]);
    if (s.closed) o << " Z";
    o << "\"/>\n";
  }
  o << "</g>\n";

  // Legend.
  int row = 0;
  for (std::size_t i = 0; i < series.size(); ++i) {
    if (series[i].label.empty()) continue;
    const double ly = y0 + 14 + 16 * row++;
    o << "<line class=\"series-" << i << "\" x1=\"" << x1 - 120 << "\" y1=\"" << ly - 4 << "\" x2=\"" << x1 - 100
      << "\" y2=\"" << ly - 4 << "\"/><text class=\"tick\" x=\"" << x1 - 95 << "\" y=\"" << ly << "\">"
      << escape(series[i].label) << "</text>\n";
  }
  o << "</svg>\n";
  return o.str();
}

}  // namespace tgeo
