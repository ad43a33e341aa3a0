#include "popdyn/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include <Eigen/Eigenvalues>
#include <fmt/format.h>

namespace popdyn {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

}  // namespace

double GaussianKernel::sigma() const { return std::sqrt(variance); }

double GaussianKernel::operator()(const Point& offset) const {
  const double norm = std::pow(2.0 * std::numbers::pi * variance, -0.5 * dim);
  return norm * std::exp(-0.5 * offset.squaredNorm() / variance);
}

double IndicatorKernel1D::operator()(const Point& offset) const {
  return std::abs(offset[0]) <= halfwidth ? 0.5 / halfwidth : 0.0;
}

double evaluate(const Kernel& kernel, const Point& offset) {
  return std::visit([&](const auto& k) { return k(offset); }, kernel);
}

int kernel_dim(const Kernel& kernel) {
  return std::visit(overloaded{[](const GaussianKernel& k) { return k.dim; },
                               [](const IndicatorKernel1D&) { return 1; }},
                    kernel);
}

double support_radius(const Kernel& kernel) {
  return std::visit(
      overloaded{[](const GaussianKernel& k) { return kGaussianTruncation * k.sigma(); },
                 [](const IndicatorKernel1D& k) { return k.halfwidth; }},
      kernel);
}

double kernel_fourier(const Kernel& kernel, double u) {
  return std::visit(
      overloaded{[u](const GaussianKernel& k) {
                   if (k.dim != 1) throw std::invalid_argument("kernel_fourier is 1D only");
                   return std::exp(-2.0 * std::numbers::pi * std::numbers::pi * k.variance * u * u);
                 },
                 [u](const IndicatorKernel1D& k) {
                   const double z = 2.0 * std::numbers::pi * k.halfwidth * u;
                   if (std::abs(z) < 1e-8) return 1.0 - z * z / 6.0;
                   return std::sin(z) / z;
                 }},
      kernel);
}

std::string describe(const Kernel& kernel) {
  return std::visit(
      overloaded{[](const GaussianKernel& k) {
                   return fmt::format("gaussian(d={}, variance={})", k.dim, k.variance);
                 },
                 [](const IndicatorKernel1D& k) {
                   return fmt::format("indicator1d(halfwidth={})", k.halfwidth);
                 }},
      kernel);
}

// --- CellList ---------------------------------------------------------------

CellList::CellList(const Box& domain, double min_cell_size) : domain_(domain), dim_(domain.dim()) {
  if (!(min_cell_size > 0.0)) throw std::invalid_argument("cell size must be positive");
  std::size_t total = 1;
  for (int a = 0; a < dim_; ++a) {
    const double len = domain.hi[a] - domain.lo[a];
    counts_[a] = std::max(1, static_cast<int>(std::floor(len / min_cell_size)));
    cell_size_[a] = len / counts_[a];
    total *= static_cast<std::size_t>(counts_[a]);
  }
  cells_.resize(total);
}

int CellList::axis_index(const Point& p, int axis) const {
  const int c = static_cast<int>(std::floor((p[axis] - domain_.lo[axis]) / cell_size_[axis]));
  return std::clamp(c, 0, counts_[axis] - 1);
}

std::size_t CellList::cell_of(const Point& p) const {
  std::size_t flat = 0;
  for (int a = dim_ - 1; a >= 0; --a) {
    flat = flat * static_cast<std::size_t>(counts_[a]) + static_cast<std::size_t>(axis_index(p, a));
  }
  return flat;
}

void CellList::rebuild(std::span<const Point> points) {
  for (auto& c : cells_) c.clear();
  for (std::size_t i = 0; i < points.size(); ++i) {
    cells_[cell_of(points[i])].push_back(static_cast<std::uint32_t>(i));
  }
}

void CellList::insert(std::uint32_t index, const Point& p) { cells_[cell_of(p)].push_back(index); }

void CellList::erase(std::uint32_t index, const Point& p) {
  auto& cell = cells_[cell_of(p)];
  auto it = std::find(cell.begin(), cell.end(), index);
  if (it == cell.end()) throw std::logic_error("cell list out of sync");
  *it = cell.back();
  cell.pop_back();
}

void CellList::renumber(std::uint32_t from, std::uint32_t to, const Point& p) {
  auto& cell = cells_[cell_of(p)];
  auto it = std::find(cell.begin(), cell.end(), from);
  if (it == cell.end()) throw std::logic_error("cell list out of sync");
  *it = to;
}

// --- DensityField -----------------------------------------------------------

namespace {

double cell_size_for(std::span<const Kernel> kernels) {
  double size = 0.0;
  for (const auto& k : kernels) {
    size = std::max(size, std::visit(overloaded{[](const GaussianKernel& g) { return 3.0 * g.sigma(); },
                                                [](const IndicatorKernel1D& ind) { return ind.halfwidth; }},
                                     k));
  }
  return size;
}

}  // namespace

DensityField::DensityField(const PointPopulation& pop, std::span<const Kernel> kernels)
    : pop_(&pop), cells_(pop.domain, kernels.empty() ? 1.0 : cell_size_for(kernels)) {
  cells_.rebuild(pop.positions);
}

double DensityField::density(const Kernel& kernel, const Point& query) const {
  if (!query.allFinite()) throw std::invalid_argument("invalid query point");
  const double radius = support_radius(kernel);
  const double r2 = radius * radius;
  double sum = 0.0;
  std::visit(overloaded{[&](const GaussianKernel& k) {
                          // Normalising constant hoisted out of the neighbour loop.
                          const double scale = -0.5 / k.variance;
                          cells_.for_each_near(query, radius, [&](std::uint32_t i) {
                            const double d2 = (query - pop_->positions[i]).squaredNorm();
                            if (d2 <= r2) sum += std::exp(scale * d2);
                          });
                          sum *= std::pow(2.0 * std::numbers::pi * k.variance, -0.5 * k.dim);
                        },
                        [&](const IndicatorKernel1D& k) {
                          cells_.for_each_near(query, radius, [&](std::uint32_t i) {
                            const Point d = query - pop_->positions[i];
                            if (d.squaredNorm() <= r2) sum += k(d);
                          });
                        }},
             kernel);
  return sum / pop_->N;
}

void DensityField::on_append(std::uint32_t index) { cells_.insert(index, pop_->positions[index]); }

void DensityField::on_swap_remove(std::uint32_t index, const Point& removed, std::uint32_t last_index) {
  cells_.erase(index, removed);
  if (index != last_index) cells_.renumber(last_index, index, pop_->positions[index]);
}

double kernel_density(const Kernel& kernel, const PointPopulation& pop, const Point& query) {
  if (!query.allFinite()) throw std::invalid_argument("invalid query point");
  if (pop.empty()) return 0.0;
  const Kernel ks[] = {kernel};
  DensityField field(pop, ks);
  return field.density(kernel, query);
}

double kernel_density_brute(const Kernel& kernel, const PointPopulation& pop, const Point& query) {
  if (!query.allFinite()) throw std::invalid_argument("invalid query point");
  double sum = 0.0;
  for (const auto& x : pop.positions) sum += evaluate(kernel, query - x);
  return pop.empty() ? 0.0 : sum / pop.N;
}

// --- DispersalLaw -----------------------------------------------------------

DispersalLaw::DispersalLaw(int dim, MeanFn mean, CovFn cov, double theta, bool constant_cov)
    : dim_(dim), mean_(std::move(mean)), cov_(std::move(cov)), theta_(theta) {
  if (dim < 1 || dim > kMaxDim) throw std::invalid_argument("dispersal dimension out of range");
  if (!(theta > 0.0)) throw std::invalid_argument("theta must be positive");
  if (constant_cov) cached_factor_ = factor(Point::Zero(dim));
}

DispersalLaw DispersalLaw::isotropic(int dim, double variance, double theta, Point mean) {
  if (mean.size() == 0) mean = Point::Zero(dim);
  Matrix cov = Matrix::Identity(dim, dim) * variance;
  return DispersalLaw(
      dim, [mean](const Point&) { return mean; }, [cov](const Point&) { return cov; }, theta, true);
}

Matrix DispersalLaw::factor(const Point& x) const {
  const Matrix c = cov_(x);
  Eigen::LLT<Matrix> llt(c);
  if (llt.info() != Eigen::Success || !c.allFinite()) {
    throw std::runtime_error("covariance not positive definite");
  }
  return llt.matrixL();
}

Point DispersalLaw::sample(const Point& x, Rng& rng) const {
  std::normal_distribution<double> normal(0.0, 1.0);
  Point z(dim_);
  for (int a = 0; a < dim_; ++a) z[a] = normal(rng);
  const Matrix k = cached_factor_ ? *cached_factor_ : factor(x);
  return x + mean_(x) / theta_ + k * z / std::sqrt(theta_);
}

double DispersalLaw::max_eigenvalue(const Point& x) const {
  Eigen::SelfAdjointEigenSolver<Matrix> es(cov_(x), Eigen::EigenvaluesOnly);
  return es.eigenvalues().maxCoeff();
}

Point sample_dispersal(const DispersalLaw& law, const Point& x, Rng& rng) { return law.sample(x, rng); }

KernelWidthReport validate_kernel_widths(double var_r, double var_gamma, double lambda_max, double theta) {
  KernelWidthReport rep;
  rep.lhs = var_r + 2.0 * lambda_max / theta;
  rep.rhs = var_gamma;
  rep.ok = rep.lhs < rep.rhs;
  if (!rep.ok) {
    rep.message = fmt::format(
        "kernel-width condition sigma_r^2 + 2 lambda_max/theta < sigma_gamma^2 fails: {:.6g} >= {:.6g}",
        rep.lhs, rep.rhs);
  }
  return rep;
}

}  // namespace popdyn
