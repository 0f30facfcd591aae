#pragma once

#include <string>
#include <vector>

#include "codedstereo/image.hpp"

namespace cs {

struct PlotSeries {
  std::vector<double> x, y;  // NaN y values break the line
  std::string label;
};

// Minimal self-contained line plot (axes, ticks, legend, 5x7 bitmap text)
// written as an 8-bit PNG. Meant for quick visual checks of curves, not
// publication graphics.
void write_line_plot(const std::string& path, const std::vector<PlotSeries>& series,
                     const std::string& title, const std::string& x_label,
                     const std::string& y_label, int width = 720, int height = 480);

}  // namespace cs
