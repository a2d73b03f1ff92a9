#pragma once

#include <string>
#include <vector>

// Dependency-free SVG emission for line charts and heatmaps. Data CSV is
// always the primary artifact; these are quick-look renderings.
namespace qlqg::svg {

struct Series {
  std::string name;
  std::vector<double> xs;
  std::vector<double> ys;
};

void write_line_chart(const std::string& path, const std::string& title,
                      const std::vector<Series>& series, bool log_y = false);

// values is rows x cols row-major; row r maps to y, column c to x.
void write_heatmap(const std::string& path, const std::string& title, int rows,
                   int cols, const std::vector<double>& values);

}  // namespace qlqg::svg
