#include "tsc/plot.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "tsc/text.hpp"

namespace tsc::plot {

namespace {

constexpr double kWidth = 640.0;
constexpr double kHeight = 420.0;
constexpr double kLeft = 70.0, kRight = 20.0, kTop = 40.0, kBottom = 55.0;

constexpr std::array<std::string_view, 8> kPalette = {
    "#1f77b4", "#ff7f0e", "#2ca02c", "#9467bd", "#8c564b", "#e377c2", "#17becf", "#bcbd22"};

// Coordinates are printed with fixed precision so output is byte-stable.
std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", std::abs(v) < 0.005 ? 0.0 : v);
  return buf;
}

std::string tick_label(double v) {
  if (std::abs(v) < 1e-12) return "0";
  return text::general(v, 6);
}

struct Range {
  double lo = 0.0, hi = 1.0;
};

Range padded(double lo, double hi) {
  if (!(hi > lo)) {
    const double pad = std::max(std::abs(lo) * 0.1, 0.5);
    return {lo - pad, hi + pad};
  }
  const double pad = (hi - lo) * 0.05;
  return {lo - pad, hi + pad};
}

struct Frame {
  double x0, y0, w, h;  // plot area in viewport units
  Range xr, yr;

  [[nodiscard]] double px(double x) const { return x0 + (x - xr.lo) / (xr.hi - xr.lo) * w; }
  [[nodiscard]] double py(double y) const { return y0 + h - (y - yr.lo) / (yr.hi - yr.lo) * h; }
};

void axes(std::string& out, const Frame& f, std::string_view title, std::string_view xl,
          std::string_view yl) {
  out += "<rect x=\"" + num(f.x0) + "\" y=\"" + num(f.y0) + "\" width=\"" + num(f.w) +
         "\" height=\"" + num(f.h) + "\" fill=\"none\" stroke=\"#333\"/>\n";
  for (double t : nice_ticks(f.xr.lo, f.xr.hi)) {
    if (t < f.xr.lo || t > f.xr.hi) continue;
    const double x = f.px(t);
    out += "<line class=\"tick\" x1=\"" + num(x) + "\" y1=\"" + num(f.y0 + f.h) + "\" x2=\"" +
           num(x) + "\" y2=\"" + num(f.y0 + f.h + 5) + "\" stroke=\"#333\"/>\n";
    out += "<text x=\"" + num(x) + "\" y=\"" + num(f.y0 + f.h + 18) +
           "\" text-anchor=\"middle\">" + xml_escape(tick_label(t)) + "</text>\n";
  }
  for (double t : nice_ticks(f.yr.lo, f.yr.hi)) {
    if (t < f.yr.lo || t > f.yr.hi) continue;
    const double y = f.py(t);
    out += "<line class=\"tick\" x1=\"" + num(f.x0 - 5) + "\" y1=\"" + num(y) + "\" x2=\"" +
           num(f.x0) + "\" y2=\"" + num(y) + "\" stroke=\"#333\"/>\n";
    out += "<text x=\"" + num(f.x0 - 8) + "\" y=\"" + num(y + 4) +
           "\" text-anchor=\"end\">" + xml_escape(tick_label(t)) + "</text>\n";
  }
  out += "<text x=\"" + num(f.x0 + f.w / 2) + "\" y=\"" + num(f.y0 - 14) +
         "\" text-anchor=\"middle\" font-weight=\"bold\">" + xml_escape(title) + "</text>\n";
  out += "<text x=\"" + num(f.x0 + f.w / 2) + "\" y=\"" + num(f.y0 + f.h + 40) +
         "\" text-anchor=\"middle\">" + xml_escape(xl) + "</text>\n";
  const double ly = f.y0 + f.h / 2, lx = f.x0 - 52;
  out += "<text x=\"" + num(lx) + "\" y=\"" + num(ly) + "\" text-anchor=\"middle\" transform=\"rotate(-90 " +
         num(lx) + " " + num(ly) + ")\">" + xml_escape(yl) + "</text>\n";
}

std::string open_svg(double width, double height) {
  return "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
         "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(width) + "\" height=\"" +
         num(height) + "\" viewBox=\"0 0 " + num(width) + " " + num(height) +
         "\" font-family=\"sans-serif\" font-size=\"12\">\n"
         "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
}

template <typename Points, typename X, typename Y>
std::pair<Range, Range> bounds(const Points& pts, X x, Y y) {
  double xlo = std::numeric_limits<double>::infinity(), xhi = -xlo, ylo = xlo, yhi = -xlo;
  for (const auto& p : pts) {
    xlo = std::min(xlo, x(p));
    xhi = std::max(xhi, x(p));
    ylo = std::min(ylo, y(p));
    yhi = std::max(yhi, y(p));
  }
  if (pts.empty()) return {Range{}, Range{}};
  return {padded(xlo, xhi), padded(ylo, yhi)};
}

void scatter_body(std::string& out, const ScatterChart& chart, const Frame& f) {
  axes(out, f, chart.title, chart.x_label, chart.y_label);
  // Ordinary points first so highlighted ones are drawn on top.
  for (int pass = 0; pass < 2; ++pass) {
    for (const auto& p : chart.points) {
      if (p.highlight != (pass == 1)) continue;
      const auto colour = kPalette[static_cast<std::size_t>(std::abs(p.group)) % kPalette.size()];
      const std::string title =
          p.label.empty() ? "" : "<title>" + xml_escape(p.label) + "</title>";
      if (p.highlight) {
        out += "<circle class=\"missed\" cx=\"" + num(f.px(p.x)) + "\" cy=\"" + num(f.py(p.y)) +
               "\" r=\"7\" fill=\"" + std::string(colour) +
               "\" stroke=\"black\" stroke-width=\"2.5\">" + title + "</circle>\n";
      } else {
        out += "<circle class=\"point g" + std::to_string(p.group) + "\" cx=\"" + num(f.px(p.x)) +
               "\" cy=\"" + num(f.py(p.y)) + "\" r=\"4\" fill=\"" + std::string(colour) + "\">" +
               title + "</circle>\n";
      }
    }
  }
  // Legend: one swatch per group in ascending order.
  std::vector<int> groups;
  for (const auto& p : chart.points) groups.push_back(p.group);
  std::sort(groups.begin(), groups.end());
  groups.erase(std::unique(groups.begin(), groups.end()), groups.end());
  double ly = f.y0 + 10;
  for (int g : groups) {
    const auto colour = kPalette[static_cast<std::size_t>(std::abs(g)) % kPalette.size()];
    out += "<rect x=\"" + num(f.x0 + f.w - 80) + "\" y=\"" + num(ly - 8) +
           "\" width=\"10\" height=\"10\" fill=\"" + std::string(colour) + "\"/>\n";
    out += "<text x=\"" + num(f.x0 + f.w - 65) + "\" y=\"" + num(ly + 1) + "\">Cluster " +
           std::to_string(g) + "</text>\n";
    ly += 16;
  }
}

}  // namespace

std::vector<double> nice_ticks(double lo, double hi, int target_count) {
  if (!std::isfinite(lo) || !std::isfinite(hi)) return {};
  if (hi < lo) std::swap(lo, hi);
  if (hi == lo) return {lo};
  const double raw = (hi - lo) / std::max(1, target_count);
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  const double norm = raw / mag;
  const double step = (norm < 1.5 ? 1.0 : norm < 3.0 ? 2.0 : norm < 7.0 ? 5.0 : 10.0) * mag;
  std::vector<double> ticks;
  const double first = std::ceil(lo / step - 1e-9);
  const double last = std::floor(hi / step + 1e-9);
  for (double i = first; i <= last; i += 1.0) ticks.push_back(i * step);
  return ticks;
}

std::string xml_escape(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string line_chart(const LineChart& chart) {
  const auto [xr, yr] = bounds(
      chart.points, [](const auto& p) { return p.first; }, [](const auto& p) { return p.second; });
  const Frame f{kLeft, kTop, kWidth - kLeft - kRight, kHeight - kTop - kBottom, xr, yr};
  std::string out = open_svg(kWidth, kHeight);
  axes(out, f, chart.title, chart.x_label, chart.y_label);
  out += "<polyline class=\"series\" fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"1.5\" points=\"";
  for (std::size_t i = 0; i < chart.points.size(); ++i) {
    if (i) out += ' ';
    out += num(f.px(chart.points[i].first)) + "," + num(f.py(chart.points[i].second));
  }
  out += "\"/>\n";
  if (chart.show_markers) {
    for (const auto& [x, y] : chart.points) {
      out += "<circle class=\"marker\" cx=\"" + num(f.px(x)) + "\" cy=\"" + num(f.py(y)) +
             "\" r=\"3\" fill=\"#1f77b4\"/>\n";
    }
  }
  out += "</svg>\n";
  return out;
}

std::string scatter_chart(const ScatterChart& chart) { return scatter_panels({chart}); }

std::string scatter_panels(const std::vector<ScatterChart>& panels) {
  std::vector<ScatterPoint> all;
  for (const auto& p : panels) all.insert(all.end(), p.points.begin(), p.points.end());
  const auto [xr, yr] = bounds(
      all, [](const ScatterPoint& p) { return p.x; }, [](const ScatterPoint& p) { return p.y; });
  const double total_w = kWidth * static_cast<double>(std::max<std::size_t>(1, panels.size()));
  std::string out = open_svg(total_w, kHeight);
  for (std::size_t i = 0; i < panels.size(); ++i) {
    const Frame f{kLeft + kWidth * static_cast<double>(i), kTop, kWidth - kLeft - kRight,
                  kHeight - kTop - kBottom, xr, yr};
    out += "<g class=\"panel\">\n";
    scatter_body(out, panels[i], f);
    out += "</g>\n";
  }
  out += "</svg>\n";
  return out;
}

}  // namespace tsc::plot
