#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Core>

namespace popdyn {

inline constexpr int kMaxDim = 3;

/// A location in R^d, d <= kMaxDim. Stored inline, no heap allocation.
using Point = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxDim, 1>;
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxDim, kMaxDim>;

Point make_point(std::initializer_list<double> coords);

/// Axis-aligned simulation box.
struct Box {
  Point lo;
  Point hi;

  int dim() const { return static_cast<int>(lo.size()); }
  double volume() const;
  bool contains(const Point& p) const;
  Point clamp(const Point& p) const;

  static Box interval(double lo, double hi);
  static Box cube(int dim, double lo, double hi);
};

/// Scaled empirical measure: each atom carries mass 1/N.
struct PointPopulation {
  std::vector<Point> positions;
  double N = 1.0;
  double time = 0.0;
  Box domain = Box::interval(0.0, 1.0);

  int dim() const { return domain.dim(); }
  std::size_t size() const { return positions.size(); }
  bool empty() const { return positions.empty(); }
  double total_mass() const { return static_cast<double>(positions.size()) / N; }

  /// Throws std::invalid_argument if an atom is non-finite or outside the box.
  void check() const;
};

}  // namespace popdyn
