#pragma once

#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "popdyn/ibm.hpp"
#include "popdyn/kernels.hpp"

namespace popdyn {

/// Constant solution phi0 with F(phi0) = 0 and the rate values and slopes there.
struct HomogeneousEquilibrium {
  double phi0 = 1.0;
  double r0 = 1.0;
  double gamma0 = 1.0;
  double dF0 = -1.0;
  double dgamma0 = 0.0;
  double dr0 = 0.0;
  /// Coefficient of the limiting Laplacian.
  double sigma2 = 1.0;
  /// Absent kernels act as point evaluation (transform 1).
  std::optional<Kernel> kernel_gamma;
  std::optional<Kernel> kernel_F;

  /// Throws unless F'(phi0) < 0 and the rates are positive.
  void check() const;
};

/// Root of F on [lo, hi] by bisection to 1e-12; "no sign change" otherwise.
double find_equilibrium(const std::function<double(double)>& F, double lo, double hi);

/// Central difference with step 1e-6 max(1, |x|).
double central_difference(const std::function<double(double)>& f, double x);

/// Equilibrium of a density-dependent model (rates read at the origin).
HomogeneousEquilibrium equilibrium_from_model(const DemographyModel& model, double sigma2, double lo, double hi);

/// lambda(u) = -(2 pi u)^2 sigma^2 (phi0 r0 gamma'0 rho_gamma^(u) + r0 gamma0) + phi0 F'0 rho_F^(u).
double growth_rate(const HomogeneousEquilibrium& eq, double u);

struct BandReport {
  bool stable = true;
  std::vector<std::pair<double, double>> bands;
  /// Grid maximiser of lambda on (0, u_max].
  double u_peak = 0.0;
  double lambda_peak = 0.0;
};

/// Scan (0, u_max] with spacing du, then refine each sign change by bisection to 1e-6.
BandReport unstable_band(const HomogeneousEquilibrium& eq, double u_max, double du);

struct Clumping {
  double frequency = 0.0;
  double wavelength = 0.0;
  double growth = 0.0;
};

/// Brent maximisation of lambda on the band holding the scan maximum; nullopt when stable.
std::optional<Clumping> clump_wavelength(const HomogeneousEquilibrium& eq, double u_max, double du);

}  // namespace popdyn
