#include "semrl/harness/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <ostream>

#include "semrl/core/error.hpp"

namespace semrl::harness {

namespace {

constexpr double kPanelW = 420, kPanelH = 300;
constexpr double kLeft = 64, kRight = 16, kTop = 48, kBottom = 52;
constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2"};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string tick_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

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

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  void add(double v) {
    if (!std::isfinite(v)) return;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  void finish() {
    if (!std::isfinite(lo)) lo = 0.0, hi = 1.0;
    if (hi - lo < 1e-12) lo -= 0.5, hi += 0.5;
  }
};

}  // namespace

void write_svg(std::ostream& out, const Chart& chart) {
  Range xr, yr;
  for (const auto& p : chart.panels) {
    for (const auto& s : p.series) {
      for (std::size_t i = 0; i < s.x.size(); ++i) {
        xr.add(s.x[i]);
        const double d = i < s.spread.size() ? s.spread[i] : 0.0;
        yr.add(s.mean[i] - d);
        yr.add(s.mean[i] + d);
      }
    }
  }
  xr.finish();
  yr.finish();
  const std::size_t n_panels = std::max<std::size_t>(1, chart.panels.size());
  const double width = kPanelW * static_cast<double>(n_panels);
  const double height = kPanelH + 24;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(width) << "\" height=\"" << num(height)
      << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << num(width / 2) << "\" y=\"18\" text-anchor=\"middle\" font-size=\"14\">" << escape(chart.title)
      << "</text>\n";
  for (std::size_t pi = 0; pi < chart.panels.size(); ++pi) {
    const auto& panel = chart.panels[pi];
    const double ox = kPanelW * static_cast<double>(pi), oy = 24;
    const double x0 = ox + kLeft, x1 = ox + kPanelW - kRight, y0 = oy + kPanelH - kBottom, y1 = oy + kTop;
    auto px = [&](double v) { return x0 + (v - xr.lo) / (xr.hi - xr.lo) * (x1 - x0); };
    auto py = [&](double v) { return y0 - (v - yr.lo) / (yr.hi - yr.lo) * (y0 - y1); };
    out << "<g>\n<text x=\"" << num((x0 + x1) / 2) << "\" y=\"" << num(oy + 20) << "\" text-anchor=\"middle\">"
        << escape(panel.title) << "</text>\n";
    out << "<rect x=\"" << num(x0) << "\" y=\"" << num(y1) << "\" width=\"" << num(x1 - x0) << "\" height=\""
        << num(y0 - y1) << "\" fill=\"none\" stroke=\"#444\"/>\n";
    for (int t = 0; t <= 4; ++t) {
      const double xv = xr.lo + (xr.hi - xr.lo) * t / 4.0, yv = yr.lo + (yr.hi - yr.lo) * t / 4.0;
      out << "<text x=\"" << num(px(xv)) << "\" y=\"" << num(y0 + 14) << "\" text-anchor=\"middle\">" << tick_label(xv)
          << "</text>\n";
      out << "<text x=\"" << num(x0 - 4) << "\" y=\"" << num(py(yv) + 4) << "\" text-anchor=\"end\">" << tick_label(yv)
          << "</text>\n";
      out << "<line x1=\"" << num(x0) << "\" x2=\"" << num(x1) << "\" y1=\"" << num(py(yv)) << "\" y2=\""
          << num(py(yv)) << "\" stroke=\"#ddd\"/>\n";
    }
    out << "<text x=\"" << num((x0 + x1) / 2) << "\" y=\"" << num(y0 + 32) << "\" text-anchor=\"middle\">"
        << escape(chart.x_label) << "</text>\n";
    out << "<text transform=\"translate(" << num(ox + 14) << "," << num((y0 + y1) / 2)
        << ") rotate(-90)\" text-anchor=\"middle\">" << escape(chart.y_label) << "</text>\n";
    for (std::size_t si = 0; si < panel.series.size(); ++si) {
      const auto& s = panel.series[si];
      const char* color = kPalette[si % (sizeof kPalette / sizeof kPalette[0])];
      if (!s.spread.empty() && !s.x.empty()) {
        out << "<polygon fill=\"" << color << "\" fill-opacity=\"0.15\" stroke=\"none\" points=\"";
        for (std::size_t i = 0; i < s.x.size(); ++i) out << num(px(s.x[i])) << ',' << num(py(s.mean[i] + s.spread[i])) << ' ';
        for (std::size_t i = s.x.size(); i-- > 0;) out << num(px(s.x[i])) << ',' << num(py(s.mean[i] - s.spread[i])) << ' ';
        out << "\"/>\n";
      }
      out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
      for (std::size_t i = 0; i < s.x.size(); ++i) out << num(px(s.x[i])) << ',' << num(py(s.mean[i])) << ' ';
      out << "\"/>\n";
      const double ly = y1 + 14 + 14 * static_cast<double>(si);
      out << "<line x1=\"" << num(x0 + 8) << "\" x2=\"" << num(x0 + 28) << "\" y1=\"" << num(ly - 4) << "\" y2=\""
          << num(ly - 4) << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
      out << "<text x=\"" << num(x0 + 32) << "\" y=\"" << num(ly) << "\">" << escape(s.label) << "</text>\n";
    }
    out << "</g>\n";
  }
  out << "</svg>\n";
}

void write_svg(const std::filesystem::path& path, const Chart& chart) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path.string());
  write_svg(out, chart);
}

}  // namespace semrl::harness
