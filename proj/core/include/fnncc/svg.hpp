#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace fnncc {

// Minimal standalone SVG line plot; enough for run-length curves without a
// plotting dependency.
struct PlotSeries {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
};

void write_svg_line_plot(const std::filesystem::path& path, const std::string& title,
                         const std::string& x_label, const std::string& y_label,
                         const std::vector<PlotSeries>& series);

}  // namespace fnncc
