#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>
#include <string_view>
#include <vector>

#include "recourse/io.hpp"

// Self-contained SVG charts: inline styles only, no scripts or external
// assets. Output is a pure function of the inputs; the only non-data text is
// the generator comment below.

namespace recourse::svg {

inline constexpr std::string_view kGenerator = "recourse-svg 1.0";

inline constexpr std::string_view kRed = "#d62728";
inline constexpr std::string_view kOrange = "#ff7f0e";
inline constexpr std::string_view kGreen = "#2ca02c";
inline constexpr std::string_view kYellow = "#f2c80f";
inline constexpr std::string_view kGrey = "#7f7f7f";
inline constexpr std::string_view kBlue = "#1f77b4";

inline std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", x);
  return buf;
}

inline std::string escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<':
        out += "&lt;";
        break;
      case '>':
        out += "&gt;";
        break;
      case '&':
        out += "&amp;";
        break;
      default:
        out += c;
    }
  }
  return out;
}

class Document {
 public:
  Document(double width, double height) : width_(width), height_(height) {}

  void rect(double x, double y, double w, double h, std::string_view fill, std::string_view extra = {}) {
    body_ += "<rect x=\"" + num(x) + "\" y=\"" + num(y) + "\" width=\"" + num(w) + "\" height=\"" + num(h) +
             "\" style=\"fill:" + std::string(fill) + ";stroke:none\"";
    if (!extra.empty()) body_ += " " + std::string(extra);
    body_ += "/>\n";
  }

  void line(double x1, double y1, double x2, double y2, std::string_view stroke, double width = 1.0,
            bool dashed = false, std::string_view extra = {}) {
    body_ += "<line x1=\"" + num(x1) + "\" y1=\"" + num(y1) + "\" x2=\"" + num(x2) + "\" y2=\"" + num(y2) +
             "\" style=\"stroke:" + std::string(stroke) + ";stroke-width:" + num(width);
    if (dashed) body_ += ";stroke-dasharray:4,3";
    body_ += "\"";
    if (!extra.empty()) body_ += " " + std::string(extra);
    body_ += "/>\n";
  }

  void text(double x, double y, std::string_view s, double size = 11.0, std::string_view anchor = "middle",
            std::string_view transform = {}) {
    body_ += "<text x=\"" + num(x) + "\" y=\"" + num(y) + "\" style=\"font-family:sans-serif;font-size:" +
             num(size) + "px;text-anchor:" + std::string(anchor) + "\"";
    if (!transform.empty()) body_ += " transform=\"" + std::string(transform) + "\"";
    body_ += ">" + escape(s) + "</text>\n";
  }

  std::string str() const {
    return "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<!-- generator: " + std::string(kGenerator) +
           " -->\n<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(width_) + "\" height=\"" +
           num(height_) + "\" viewBox=\"0 0 " + num(width_) + " " + num(height_) + "\">\n" +
           "<rect x=\"0\" y=\"0\" width=\"" + num(width_) + "\" height=\"" + num(height_) +
           "\" style=\"fill:#ffffff\"/>\n" + body_ + "</svg>\n";
  }

 private:
  double width_;
  double height_;
  std::string body_;
};

/// Piecewise-linear blue -> teal -> yellow ramp, t in [0, 1].
inline std::string ramp_color(double t) {
  static constexpr double stops[3][3] = {{68, 1, 84}, {33, 145, 140}, {253, 231, 37}};
  t = std::clamp(std::isfinite(t) ? t : 0.0, 0.0, 1.0);
  const double s = t * 2.0;
  const int i = std::min(static_cast<int>(s), 1);
  const double f = s - i;
  char buf[8];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x",
                static_cast<int>(std::lround(stops[i][0] + f * (stops[i + 1][0] - stops[i][0]))),
                static_cast<int>(std::lround(stops[i][1] + f * (stops[i + 1][1] - stops[i][1]))),
                static_cast<int>(std::lround(stops[i][2] + f * (stops[i + 1][2] - stops[i][2]))));
  return buf;
}

/// Heatmap with x = columns, y = rows (row 0 at the bottom).
/// `cells` is row-major, rows.size() x cols.size().
inline std::string heatmap(std::string_view title, std::string_view x_label, std::string_view y_label,
                           const std::vector<double>& cols, const std::vector<double>& rows,
                           const std::vector<double>& cells) {
  const double left = 70, top = 40, plot = 400, right = 110, bottom = 60;
  Document doc(left + plot + right, top + plot + bottom);
  doc.text(left + plot / 2, 22, title, 14);
  double lo = HUGE_VAL, hi = -HUGE_VAL;
  for (double v : cells) {
    if (std::isfinite(v)) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  if (!(lo <= hi)) lo = hi = 0.0;
  const double span = hi > lo ? hi - lo : 1.0;
  const double cw = plot / static_cast<double>(cols.size());
  const double ch = plot / static_cast<double>(rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < cols.size(); ++c) {
      const double v = cells[r * cols.size() + c];
      doc.rect(left + static_cast<double>(c) * cw, top + plot - static_cast<double>(r + 1) * ch, cw + 0.05, ch + 0.05,
               ramp_color((v - lo) / span));
    }
  }
  for (int k = 0; k <= 4; ++k) {
    const double f = k / 4.0;
    const double xv = cols.front() + f * (cols.back() - cols.front());
    const double yv = rows.front() + f * (rows.back() - rows.front());
    doc.text(left + f * plot, top + plot + 16, io::format_number(xv, 3), 10);
    doc.text(left - 6, top + plot - f * plot + 4, io::format_number(yv, 3), 10, "end");
  }
  doc.text(left + plot / 2, top + plot + 38, x_label, 12);
  doc.text(18, top + plot / 2, y_label, 12, "middle", "rotate(-90 18 " + num(top + plot / 2) + ")");
  const double lx = left + plot + 25;
  for (int k = 0; k < 50; ++k) {
    const double f = k / 49.0;
    doc.rect(lx, top + plot - (k + 1) * plot / 50.0, 18, plot / 50.0 + 0.05, ramp_color(f));
  }
  doc.text(lx + 24, top + plot, io::format_number(lo, 4), 10, "start");
  doc.text(lx + 24, top + 8, io::format_number(hi, 4), 10, "start");
  return doc.str();
}

struct Series {
  std::string name;
  std::string color;
  std::vector<std::size_t> counts;  // one per bin
};

struct Marker {
  double value;
  std::string label;
};

struct HistogramPanel {
  std::string title;
  std::vector<double> edges;  // bins + 1 ascending values on [0, 1]
  std::vector<Series> series;  // stacked bottom to top
  std::vector<Marker> markers;
};

/// Stacked histograms, one panel per entry, stacked vertically. Markers are
/// dashed vertical lines labeled with their exact value (12 digits), the same
/// text the CSV outputs carry.
inline std::string histograms(const std::vector<HistogramPanel>& panels, std::string_view x_label) {
  const double left = 60, width = 520, panel_h = 220, gap = 50, top = 20;
  Document doc(left + width + 170, top + static_cast<double>(panels.size()) * (panel_h + gap) + 20);
  for (std::size_t pi = 0; pi < panels.size(); ++pi) {
    const HistogramPanel& panel = panels[pi];
    const double y0 = top + static_cast<double>(pi) * (panel_h + gap) + 20;
    const double base = y0 + panel_h;
    const std::size_t nbins = panel.edges.size() - 1;
    std::size_t peak = 1;
    for (std::size_t b = 0; b < nbins; ++b) {
      std::size_t total = 0;
      for (const auto& s : panel.series) total += s.counts[b];
      peak = std::max(peak, total);
    }
    const double scale = panel_h / static_cast<double>(peak);
    doc.text(left + width / 2, y0 - 6, panel.title, 13);
    for (std::size_t b = 0; b < nbins; ++b) {
      const double x = left + panel.edges[b] * width;
      const double w = (panel.edges[b + 1] - panel.edges[b]) * width;
      double y = base;
      for (const auto& s : panel.series) {
        const double h = static_cast<double>(s.counts[b]) * scale;
        if (h > 0) doc.rect(x + 0.5, y - h, std::max(w - 1.0, 0.5), h, s.color);
        y -= h;
      }
    }
    doc.line(left, base, left + width, base, "#000000");
    doc.line(left, y0, left, base, "#000000");
    for (int k = 0; k <= 10; ++k) {
      const double f = k / 10.0;
      doc.text(left + f * width, base + 14, io::format_number(f, 2), 10);
    }
    doc.text(left - 6, y0 + 4, std::to_string(peak), 10, "end");
    doc.text(left - 6, base, "0", 10, "end");
    for (const auto& mk : panel.markers) {
      const double x = left + mk.value * width;
      doc.line(x, y0, x, base, "#000000", 1.0, true, "data-value=\"" + io::format_number(mk.value) + "\"");
      doc.text(x, y0 + 10, mk.label + " " + io::format_number(mk.value), 9);
    }
    double ly = y0 + 10;
    for (const auto& s : panel.series) {
      doc.rect(left + width + 20, ly - 9, 12, 12, s.color);
      doc.text(left + width + 38, ly + 1, s.name, 11, "start");
      ly += 18;
    }
    doc.text(left + width / 2, base + 32, x_label, 11);
  }
  return doc.str();
}

}  // namespace recourse::svg
