#include "popdyn/field.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace popdyn {

Grid1D Grid1D::covering(double lo, double hi, double h) {
  if (!(hi > lo) || !(h > 0.0)) throw std::invalid_argument("grid needs hi > lo and h > 0");
  const auto cells = static_cast<std::size_t>(std::llround((hi - lo) / h));
  Grid1D g;
  g.x0 = lo;
  g.n = std::max<std::size_t>(cells, 1) + 1;
  g.h = (hi - lo) / static_cast<double>(g.n - 1);
  return g;
}

double ScalarField1D::max() const {
  return values.empty() ? 0.0 : *std::max_element(values.begin(), values.end());
}

double ScalarField1D::integral() const {
  if (values.size() < 2) return 0.0;
  double s = 0.5 * (values.front() + values.back());
  for (std::size_t i = 1; i + 1 < values.size(); ++i) s += values[i];
  return s * grid.h;
}

}  // namespace popdyn
