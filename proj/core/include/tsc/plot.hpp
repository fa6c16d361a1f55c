#pragma once

// Minimal self-contained SVG charts: fixed viewport, linear axes, "nice"
// tick marks. No external assets, no scripts.

#include <string>
#include <utility>
#include <vector>

namespace tsc::plot {

/// Evenly spaced round-number ticks (1, 2, 5 x 10^n) covering [lo, hi].
[[nodiscard]] std::vector<double> nice_ticks(double lo, double hi, int target_count = 5);

struct LineChart {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<std::pair<double, double>> points;
  bool show_markers = false;
};

[[nodiscard]] std::string line_chart(const LineChart& chart);

struct ScatterPoint {
  double x = 0.0;
  double y = 0.0;
  int group = 0;
  bool highlight = false;
  std::string label;
};

struct ScatterChart {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<ScatterPoint> points;
};

[[nodiscard]] std::string scatter_chart(const ScatterChart& chart);

/// Several scatter panels side by side in one document, sharing axis ranges.
[[nodiscard]] std::string scatter_panels(const std::vector<ScatterChart>& panels);

[[nodiscard]] std::string xml_escape(std::string_view text);

}  // namespace tsc::plot
