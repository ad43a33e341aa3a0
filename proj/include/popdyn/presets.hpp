#pragma once

#include <string>
#include <vector>

#include "popdyn/ibm.hpp"

namespace popdyn {

/// Knobs shared by the built-in demographies. `diffusion` is the coefficient of the
/// limiting Laplacian (sigma^2 in sigma^2 Laplacian); the offspring displacement
/// covariance is 2 * diffusion * I / theta.
struct PresetParams {
  double N = 50.0;
  double theta = 20.0;
  double diffusion = 0.5;
  /// Variance of the Gaussian interaction kernels.
  double interaction_variance = 1.0;
  double domain_lo = 0.0;
  double domain_hi = 10.0;
  int dim = 1;
  /// Allen-Cahn asymmetry.
  double s = 0.5;
  /// Cap on gamma for density-proportional birth (PME).
  double gamma_cap = 20.0;
  /// Largest local density assumed when bounding mu_theta.
  double density_ceiling = 10.0;
};

/// gamma = r = 1, F(m) = 1 - m.
DemographyModel logistic_model(const PresetParams& p);
/// gamma = r = 1, F = 0 (critical branching).
DemographyModel critical_model(const PresetParams& p);
/// Same demography as the logistic model; kept separate for wave presets.
DemographyModel fkpp_model(const PresetParams& p);
/// gamma = r = 1, F(m) = (1 - m)(2m - 1 + s).
DemographyModel allen_cahn_model(const PresetParams& p);
/// gamma(m) = min(m, gamma_cap), r = 1, F(m) = 1 - m.
DemographyModel pme_model(const PresetParams& p);
/// gamma(m) = 3/(1+m), mu = 0.3, r = 1, rho_gamma Gaussian with variance 9, dispersal sd 0.2.
DemographyModel clumping_model(const PresetParams& p);

DemographyModel model_by_name(const std::string& name, const PresetParams& p);
const std::vector<std::string>& preset_names();

/// sup over m in [0, ceiling] of r*gamma - F/theta, scanned on a fine grid.
double bound_mu(const DemographyModel& model, double ceiling);

}  // namespace popdyn
