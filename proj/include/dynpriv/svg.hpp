#pragma once

// Minimal SVG line and scatter plots for diagnostic output.

#include <string>
#include <vector>

namespace dynpriv::svg {

struct Series {
  std::vector<double> x;
  std::vector<double> y;
  std::string color = "#1f77b4";
  bool dotted = false;
  double width = 1.0;
};

struct Axes {
  std::string title;
  std::string xlabel;
  std::string ylabel;
};

// Long series are thinned to about max_points vertices each.
std::string line_plot(const Axes& axes, const std::vector<Series>& series,
                      std::size_t max_points = 600);

// Points plus an optional y = x reference line.
std::string scatter_plot(const Axes& axes, const std::vector<double>& x,
                         const std::vector<double>& y, bool diagonal);

// Distinct colours for many curves.
std::string palette(std::size_t i);

}  // namespace dynpriv::svg
