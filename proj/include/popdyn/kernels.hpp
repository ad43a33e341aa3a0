#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Cholesky>

#include "popdyn/population.hpp"
#include "popdyn/random.hpp"

namespace popdyn {

/// Centered isotropic Gaussian density p_{variance}(.) on R^dim.
struct GaussianKernel {
  int dim = 1;
  double variance = 1.0;

  double operator()(const Point& offset) const;
  double sigma() const;
};

/// 1_{[-eps, eps]}(x) / (2 eps).
struct IndicatorKernel1D {
  double halfwidth = 1.0;

  double operator()(const Point& offset) const;
};

using Kernel = std::variant<GaussianKernel, IndicatorKernel1D>;

/// Gaussian density queries ignore atoms farther than this many standard deviations.
inline constexpr double kGaussianTruncation = 8.0;

double evaluate(const Kernel& kernel, const Point& offset);
int kernel_dim(const Kernel& kernel);
/// Radius outside which the kernel is treated as zero.
double support_radius(const Kernel& kernel);
/// Fourier transform with convention f^(u) = int e^{2 pi i u x} f(x) dx (1D only).
double kernel_fourier(const Kernel& kernel, double u);
std::string describe(const Kernel& kernel);

/// Uniform grid of cells over a box; each cell keeps the indices of the atoms inside it.
/// Atoms outside the box are filed in the nearest boundary cell.
class CellList {
 public:
  CellList() = default;
  CellList(const Box& domain, double min_cell_size);

  void rebuild(std::span<const Point> points);
  void insert(std::uint32_t index, const Point& p);
  void erase(std::uint32_t index, const Point& p);
  /// Re-files the atom at `p` from index `from` to index `to` (swap-remove support).
  void renumber(std::uint32_t from, std::uint32_t to, const Point& p);

  double cell_size(int axis) const { return cell_size_[axis]; }

  template <class Fn>
  void for_each_near(const Point& q, double radius, Fn&& fn) const;

 private:
  std::size_t cell_of(const Point& p) const;
  int axis_index(const Point& p, int axis) const;

  Box domain_;
  int dim_ = 0;
  std::array<int, kMaxDim> counts_{};
  std::array<double, kMaxDim> cell_size_{};
  std::vector<std::vector<std::uint32_t>> cells_;
};

/// Local-density evaluator over a population snapshot: (rho * eta)(x) = (1/N) sum_i rho(x - x_i).
/// Holds a reference to the positions; rebuild after the population changes.
class DensityField {
 public:
  DensityField(const PointPopulation& pop, std::span<const Kernel> kernels);

  double density(const Kernel& kernel, const Point& query) const;
  /// Keeps the cell list in sync with push_back / swap-remove on the population.
  void on_append(std::uint32_t index);
  void on_swap_remove(std::uint32_t index, const Point& removed, std::uint32_t last_index);

 private:
  const PointPopulation* pop_;
  CellList cells_;
};

/// (rho * eta)(query) using a cell list; throws "invalid query point" for non-finite queries.
double kernel_density(const Kernel& kernel, const PointPopulation& pop, const Point& query);
/// O(n) reference sum over every atom, no truncation.
double kernel_density_brute(const Kernel& kernel, const PointPopulation& pop, const Point& query);

/// Offspring displacement law: Normal(b(x)/theta, C(x)/theta).
class DispersalLaw {
 public:
  using MeanFn = std::function<Point(const Point&)>;
  using CovFn = std::function<Matrix(const Point&)>;

  DispersalLaw(int dim, MeanFn mean, CovFn cov, double theta, bool constant_cov = false);
  static DispersalLaw isotropic(int dim, double variance, double theta, Point mean = {});

  int dim() const { return dim_; }
  double theta() const { return theta_; }
  Point mean(const Point& x) const { return mean_(x); }
  Matrix cov(const Point& x) const { return cov_(x); }
  Point sample(const Point& x, Rng& rng) const;
  /// Largest eigenvalue of C(x).
  double max_eigenvalue(const Point& x) const;

 private:
  Matrix factor(const Point& x) const;

  int dim_;
  MeanFn mean_;
  CovFn cov_;
  double theta_;
  std::optional<Matrix> cached_factor_;
};

Point sample_dispersal(const DispersalLaw& law, const Point& x, Rng& rng);

struct KernelWidthReport {
  bool ok = true;
  double lhs = 0.0;  // sigma_r^2 + 2 lambda_max / theta
  double rhs = 0.0;  // sigma_gamma^2
  std::string message;
};

/// Checks sigma_r^2 + 2 lambda_max / theta < sigma_gamma^2. Advisory only.
KernelWidthReport validate_kernel_widths(double var_r, double var_gamma, double lambda_max, double theta);

// ---------------------------------------------------------------------------

template <class Fn>
void CellList::for_each_near(const Point& q, double radius, Fn&& fn) const {
  std::array<int, kMaxDim> lo{}, hi{};
  for (int a = 0; a < dim_; ++a) {
    const int reach = static_cast<int>(std::ceil(radius / cell_size_[a]));
    const int c = axis_index(q, a);
    lo[a] = std::max(0, c - reach);
    hi[a] = std::min(counts_[a] - 1, c + reach);
  }
  std::array<int, kMaxDim> idx = lo;
  while (true) {
    std::size_t flat = 0;
    for (int a = dim_ - 1; a >= 0; --a) flat = flat * static_cast<std::size_t>(counts_[a]) + idx[a];
    for (std::uint32_t i : cells_[flat]) fn(i);
    int a = 0;
    for (; a < dim_; ++a) {
      if (++idx[a] <= hi[a]) break;
      idx[a] = lo[a];
    }
    if (a == dim_) break;
  }
}

}  // namespace popdyn
