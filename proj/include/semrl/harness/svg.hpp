#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace semrl::harness {

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> mean;
  std::vector<double> spread;  // drawn as a +-band when non-empty
};

struct Panel {
  std::string title;
  std::vector<Series> series;
};

struct Chart {
  std::string title;
  std::string x_label = "environment steps";
  std::string y_label = "reward (moving average, 100 episodes)";
  std::vector<Panel> panels;  // laid out left to right, sharing the y range
};

void write_svg(std::ostream& out, const Chart& chart);
void write_svg(const std::filesystem::path& path, const Chart& chart);

}  // namespace semrl::harness
