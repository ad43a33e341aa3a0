#pragma once

#include <cstddef>
#include <vector>

namespace popdyn {

/// Uniform nodes x_i = x0 + i h, i = 0..n-1.
struct Grid1D {
  double x0 = 0.0;
  double h = 1.0;
  std::size_t n = 0;

  double x(std::size_t i) const { return x0 + h * static_cast<double>(i); }
  double back() const { return x(n - 1); }
  /// Nodes from lo to hi inclusive with spacing as close to h as possible.
  static Grid1D covering(double lo, double hi, double h);
};

struct ScalarField1D {
  Grid1D grid;
  std::vector<double> values;
  double t = 0.0;

  double max() const;
  /// Trapezoid rule over the whole grid.
  double integral() const;
};

}  // namespace popdyn
