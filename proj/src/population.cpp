#include "popdyn/population.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace popdyn {

Point make_point(std::initializer_list<double> coords) {
  if (coords.size() == 0 || coords.size() > static_cast<std::size_t>(kMaxDim)) {
    throw std::invalid_argument("point dimension must be in 1.." + std::to_string(kMaxDim));
  }
  Point p(static_cast<Eigen::Index>(coords.size()));
  Eigen::Index i = 0;
  for (double c : coords) p[i++] = c;
  return p;
}

double Box::volume() const {
  double v = 1.0;
  for (int a = 0; a < dim(); ++a) v *= hi[a] - lo[a];
  return v;
}

bool Box::contains(const Point& p) const {
  if (p.size() != lo.size()) return false;
  for (int a = 0; a < dim(); ++a) {
    if (!(p[a] >= lo[a] && p[a] <= hi[a])) return false;
  }
  return true;
}

Point Box::clamp(const Point& p) const {
  Point q = p;
  for (int a = 0; a < dim(); ++a) q[a] = std::min(std::max(q[a], lo[a]), hi[a]);
  return q;
}

Box Box::interval(double lo, double hi) { return cube(1, lo, hi); }

Box Box::cube(int dim, double lo, double hi) {
  if (dim < 1 || dim > kMaxDim) throw std::invalid_argument("box dimension out of range");
  if (!(hi > lo)) throw std::invalid_argument("box must have hi > lo");
  Box b;
  b.lo = Point::Constant(dim, lo);
  b.hi = Point::Constant(dim, hi);
  return b;
}

void PointPopulation::check() const {
  if (!(N > 0.0)) throw std::invalid_argument("N must be positive");
  for (const auto& p : positions) {
    if (p.size() != domain.lo.size()) throw std::invalid_argument("atom dimension mismatch");
    if (!p.allFinite()) throw std::invalid_argument("non-finite atom position");
    if (!domain.contains(p)) throw std::invalid_argument("atom outside domain box");
  }
}

}  // namespace popdyn
