#include "popdyn/stability.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/roots.hpp>

namespace popdyn {

void HomogeneousEquilibrium::check() const {
  if (!(phi0 > 0.0)) throw std::invalid_argument("equilibrium density must be positive");
  if (!(dF0 < 0.0)) throw std::invalid_argument("F'(phi0) must be negative");
  if (!(r0 > 0.0) || !(gamma0 > 0.0) || !(sigma2 > 0.0)) throw std::invalid_argument("rates must be positive");
}

double find_equilibrium(const std::function<double(double)>& F, double lo, double hi) {
  const double flo = F(lo), fhi = F(hi);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if ((flo > 0.0) == (fhi > 0.0)) throw std::invalid_argument("no sign change");
  auto tol = [](double a, double b) { return std::abs(b - a) <= 1e-12; };
  const auto [a, b] = boost::math::tools::bisect(F, lo, hi, tol);
  return 0.5 * (a + b);
}

double central_difference(const std::function<double(double)>& f, double x) {
  const double h = 1e-6 * std::max(1.0, std::abs(x));
  return (f(x + h) - f(x - h)) / (2.0 * h);
}

HomogeneousEquilibrium equilibrium_from_model(const DemographyModel& model, double sigma2, double lo, double hi) {
  const Point origin = Point::Zero(model.dispersal.dim());
  auto F = [&](double m) { return model.F(origin, m); };
  auto gamma = [&](double m) { return model.gamma(origin, m); };
  auto r = [&](double m) { return model.r(origin, m); };
  HomogeneousEquilibrium eq;
  eq.phi0 = find_equilibrium(F, lo, hi);
  eq.r0 = r(eq.phi0);
  eq.gamma0 = gamma(eq.phi0);
  eq.dF0 = central_difference(F, eq.phi0);
  eq.dgamma0 = model.gamma.density_dependent ? central_difference(gamma, eq.phi0) : 0.0;
  eq.dr0 = model.r.density_dependent ? central_difference(r, eq.phi0) : 0.0;
  eq.sigma2 = sigma2;
  if (model.gamma.density_dependent) eq.kernel_gamma = model.kernel_gamma;
  if (model.F.density_dependent) eq.kernel_F = model.kernel_F;
  eq.check();
  return eq;
}

double growth_rate(const HomogeneousEquilibrium& eq, double u) {
  const double hat_gamma = eq.kernel_gamma ? kernel_fourier(*eq.kernel_gamma, u) : 1.0;
  const double hat_F = eq.kernel_F ? kernel_fourier(*eq.kernel_F, u) : 1.0;
  const double k2 = std::pow(2.0 * std::numbers::pi * u, 2);
  return -k2 * eq.sigma2 * (eq.phi0 * eq.r0 * eq.dgamma0 * hat_gamma + eq.r0 * eq.gamma0) +
         eq.phi0 * eq.dF0 * hat_F;
}

BandReport unstable_band(const HomogeneousEquilibrium& eq, double u_max, double du) {
  if (!(du > 0.0) || !(u_max > du)) throw std::invalid_argument("bad frequency grid");
  auto f = [&eq](double u) { return growth_rate(eq, u); };
  auto tol = [](double a, double b) { return std::abs(b - a) <= 1e-6; };
  auto edge = [&](double a, double b) {
    const auto [x, y] = boost::math::tools::bisect(f, a, b, tol);
    return 0.5 * (x + y);
  };
  BandReport rep;
  const auto n = static_cast<std::size_t>(std::floor(u_max / du));
  double prev_u = 0.0, prev = f(0.0);
  rep.u_peak = 0.0;
  rep.lambda_peak = prev;
  double start = prev > 0.0 ? 0.0 : -1.0;
  for (std::size_t k = 1; k <= n; ++k) {
    const double u = static_cast<double>(k) * du;
    const double v = f(u);
    if (v > rep.lambda_peak) {
      rep.lambda_peak = v;
      rep.u_peak = u;
    }
    if (prev <= 0.0 && v > 0.0) start = edge(prev_u, u);
    if (prev > 0.0 && v <= 0.0) {
      rep.bands.emplace_back(start, edge(prev_u, u));
      start = -1.0;
    }
    prev_u = u;
    prev = v;
  }
  if (start >= 0.0) rep.bands.emplace_back(start, prev_u);
  rep.stable = rep.bands.empty();
  return rep;
}

std::optional<Clumping> clump_wavelength(const HomogeneousEquilibrium& eq, double u_max, double du) {
  const BandReport rep = unstable_band(eq, u_max, du);
  if (rep.stable) return std::nullopt;
  auto band = rep.bands.front();
  for (const auto& b : rep.bands) {
    if (rep.u_peak >= b.first && rep.u_peak <= b.second) band = b;
  }
  auto neg = [&eq](double u) { return -growth_rate(eq, u); };
  const auto [u, v] = boost::math::tools::brent_find_minima(neg, band.first, band.second, 40);
  Clumping c;
  c.frequency = u;
  c.wavelength = 1.0 / u;
  c.growth = -v;
  return c;
}

}  // namespace popdyn
