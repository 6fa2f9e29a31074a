#pragma once

// Minimal standalone SVG line charts for result series. Charts are a viewing
// convenience; the CSV files remain the canonical output.

#include <filesystem>
#include <string>
#include <vector>

namespace lwrnet {

struct ChartSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

void write_line_chart_svg(const std::filesystem::path& path, const std::string& title,
                          const std::string& x_label, const std::string& y_label,
                          const std::vector<ChartSeries>& series);

}  // namespace lwrnet
