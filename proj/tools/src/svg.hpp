// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

namespace hvacdr::tools {

struct Series {
  std::string name;
  std::vector<double> y;  // NaN breaks the line
  std::string color = "#1f77b4";
  bool step = false;  // hold each value for one x step
};

// Shaded area between two curves, e.g. a comfort band.
struct Band {
  std::vector<double> lo, hi;
  std::string color = "#2ca02c";
};

struct Chart {
  std::string title;
  std::string x_label = "hour";
  std::string y_label;
  std::vector<double> x;
  std::vector<Series> series;
  std::vector<Band> bands;
};

std::string render_svg(const Chart& chart, int width = 720, int height = 320);

}  // namespace hvacdr::tools
