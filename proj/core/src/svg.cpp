#include "bicex/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace bicex {

namespace {

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};
constexpr int kPaletteSize = 6;

std::string px(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4g", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (const char c : s) {
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
  double lo = 0.0;
  double hi = 1.0;

  void widen(double v) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  double span() const { return hi > lo ? hi - lo : 1.0; }
};

std::string header(double width, double height, const std::string& provenance) {
  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << px(width) << "\" height=\""
      << px(height) << "\" viewBox=\"0 0 " << px(width) << ' ' << px(height) << "\">\n";
  out << "<!-- data-provenance: " << escape(provenance) << " -->\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n";
  return out.str();
}

}  // namespace

std::string svg_line_chart(const std::string& title, const std::string& x_label,
                           const std::string& y_label, const std::vector<SvgSeries>& series,
                           const std::string& provenance) {
  if (series.empty()) throw std::invalid_argument("svg_line_chart: need at least one series");
  const double width = 860.0, height = 520.0;
  const double left = 80.0, right = 30.0, top = 50.0, bottom = 60.0;
  const double plot_w = width - left - right;
  const double plot_h = height - top - bottom;

  bool first = true;
  Range xr, yr;
  for (const SvgSeries& s : series) {
    if (s.x.size() != s.y.size()) {
      throw std::invalid_argument("svg_line_chart: series x and y lengths differ");
    }
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (first) {
        xr = Range{s.x[i], s.x[i]};
        yr = Range{s.y[i], s.y[i]};
        first = false;
      } else {
        xr.widen(s.x[i]);
        yr.widen(s.y[i]);
      }
    }
  }
  if (first) throw std::invalid_argument("svg_line_chart: series are empty");
  const double pad = 0.05 * yr.span();
  yr.lo -= pad;
  yr.hi += pad;

  auto sx = [&](double v) { return left + (v - xr.lo) / xr.span() * plot_w; };
  auto sy = [&](double v) { return top + plot_h - (v - yr.lo) / yr.span() * plot_h; };

  std::ostringstream out;
  out << header(width, height, provenance);
  out << "<text x=\"" << px(width / 2) << "\" y=\"28\" text-anchor=\"middle\" "
      << "font-family=\"sans-serif\" font-size=\"18\">" << escape(title) << "</text>\n";

  out << "<g stroke=\"#cccccc\" stroke-width=\"1\" font-family=\"sans-serif\" font-size=\"12\" "
      << "fill=\"#333333\">\n";
  for (int i = 0; i <= 4; ++i) {
    const double xv = xr.lo + xr.span() * i / 4.0;
    const double yv = yr.lo + yr.span() * i / 4.0;
    const double gx = sx(xv);
    const double gy = sy(yv);
    out << "<line x1=\"" << px(gx) << "\" y1=\"" << px(top) << "\" x2=\"" << px(gx) << "\" y2=\""
        << px(top + plot_h) << "\"/>\n";
    out << "<line x1=\"" << px(left) << "\" y1=\"" << px(gy) << "\" x2=\"" << px(left + plot_w)
        << "\" y2=\"" << px(gy) << "\"/>\n";
    out << "<text x=\"" << px(gx) << "\" y=\"" << px(top + plot_h + 18)
        << "\" text-anchor=\"middle\" stroke=\"none\">" << num(xv) << "</text>\n";
    out << "<text x=\"" << px(left - 8) << "\" y=\"" << px(gy + 4)
        << "\" text-anchor=\"end\" stroke=\"none\">" << num(yv) << "</text>\n";
  }
  out << "</g>\n";
  out << "<rect x=\"" << px(left) << "\" y=\"" << px(top) << "\" width=\"" << px(plot_w)
      << "\" height=\"" << px(plot_h) << "\" fill=\"none\" stroke=\"#333333\"/>\n";
  out << "<text x=\"" << px(left + plot_w / 2) << "\" y=\"" << px(height - 14)
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">"
      << escape(x_label) << "</text>\n";
  out << "<text x=\"20\" y=\"" << px(top + plot_h / 2)
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" "
      << "transform=\"rotate(-90 20 " << px(top + plot_h / 2) << ")\">" << escape(y_label)
      << "</text>\n";

  for (std::size_t s = 0; s < series.size(); ++s) {
    const char* color = kPalette[s % kPaletteSize];
    out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < series[s].x.size(); ++i) {
      if (i > 0) out << ' ';
      out << px(sx(series[s].x[i])) << ',' << px(sy(series[s].y[i]));
    }
    out << "\"/>\n";
    const double ly = top + 16 + 18 * static_cast<double>(s);
    out << "<line x1=\"" << px(left + plot_w - 150) << "\" y1=\"" << px(ly) << "\" x2=\""
        << px(left + plot_w - 126) << "\" y2=\"" << px(ly) << "\" stroke=\"" << color
        << "\" stroke-width=\"2\"/>\n";
    out << "<text x=\"" << px(left + plot_w - 120) << "\" y=\"" << px(ly + 4)
        << "\" font-family=\"sans-serif\" font-size=\"12\">" << escape(series[s].label)
        << "</text>\n";
  }
  out << "</svg>\n";
  return out.str();
}

std::string svg_heatmap(const std::string& title, const std::vector<std::string>& row_labels,
                        const std::vector<std::string>& col_labels,
                        const std::vector<double>& values, const std::string& provenance) {
  const std::size_t rows = row_labels.size();
  const std::size_t cols = col_labels.size();
  if (rows == 0 || cols == 0 || values.size() != rows * cols) {
    throw std::invalid_argument("svg_heatmap: labels and values are inconsistent");
  }
  double max_abs = 0.0;
  for (const double v : values) max_abs = std::max(max_abs, std::fabs(v));
  if (max_abs == 0.0) max_abs = 1.0;

  const double cell_w = 96.0, cell_h = 34.0;
  const double left = 220.0, top = 70.0;
  const double width = left + cell_w * static_cast<double>(cols) + 30.0;
  const double height = top + cell_h * static_cast<double>(rows) + 30.0;

  auto shade = [&](double v) {
    const double t = std::min(1.0, std::fabs(v) / max_abs);
    const int r0 = 255, g0 = 255, b0 = 255;
    const int r1 = v < 0.0 ? 192 : 36, g1 = v < 0.0 ? 57 : 113, b1 = v < 0.0 ? 43 : 163;
    char buf[16];
    std::snprintf(buf, sizeof(buf), "#%02x%02x%02x",
                  static_cast<int>(std::lround(r0 + (r1 - r0) * t)),
                  static_cast<int>(std::lround(g0 + (g1 - g0) * t)),
                  static_cast<int>(std::lround(b0 + (b1 - b0) * t)));
    return std::string(buf);
  };

  std::ostringstream out;
  out << header(width, height, provenance);
  out << "<text x=\"" << px(width / 2) << "\" y=\"28\" text-anchor=\"middle\" "
      << "font-family=\"sans-serif\" font-size=\"18\">" << escape(title) << "</text>\n";
  for (std::size_t c = 0; c < cols; ++c) {
    out << "<text x=\"" << px(left + cell_w * (static_cast<double>(c) + 0.5)) << "\" y=\""
        << px(top - 10) << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
        << "font-size=\"12\">" << escape(col_labels[c]) << "</text>\n";
  }
  for (std::size_t r = 0; r < rows; ++r) {
    const double y = top + cell_h * static_cast<double>(r);
    out << "<text x=\"" << px(left - 10) << "\" y=\"" << px(y + cell_h / 2 + 4)
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"12\">"
        << escape(row_labels[r]) << "</text>\n";
    for (std::size_t c = 0; c < cols; ++c) {
      const double v = values[r * cols + c];
      const double x = left + cell_w * static_cast<double>(c);
      out << "<rect x=\"" << px(x) << "\" y=\"" << px(y) << "\" width=\"" << px(cell_w)
          << "\" height=\"" << px(cell_h) << "\" fill=\"" << shade(v)
          << "\" stroke=\"#666666\" stroke-width=\"0.5\"/>\n";
      out << "<text x=\"" << px(x + cell_w / 2) << "\" y=\"" << px(y + cell_h / 2 + 4)
          << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" << num(v)
          << "</text>\n";
    }
  }
  out << "</svg>\n";
  return out.str();
}

}  // namespace bicex
