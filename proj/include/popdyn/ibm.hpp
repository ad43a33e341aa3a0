#pragma once

#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "popdyn/field.hpp"
#include "popdyn/kernels.hpp"
#include "popdyn/population.hpp"
#include "popdyn/random.hpp"

namespace popdyn {

/// A demographic rate f(x, m) of location and local density.
struct RateFunction {
  std::function<double(const Point&, double)> fn;
  /// When false the local density is never computed for this rate (m is passed as 0).
  bool density_dependent = true;

  double operator()(const Point& x, double m) const { return fn(x, m); }
  static RateFunction constant(double value);
  static RateFunction of_density(std::function<double(double)> f);
};

/// Birth (gamma), establishment (r) and net reproduction (F) with their smoothing kernels.
struct DemographyModel {
  std::string name;
  RateFunction gamma;
  RateFunction r;
  RateFunction F;
  Kernel kernel_gamma = GaussianKernel{};
  Kernel kernel_r = GaussianKernel{};
  Kernel kernel_F = GaussianKernel{};
  DispersalLaw dispersal = DispersalLaw::isotropic(1, 1.0, 1.0);
  double theta = 1.0;
  /// Birth rates are clamped to this value.
  double gamma_cap = 1.0;
  /// Upper bound on mu_theta used by the step-size guard and by thinning.
  double mu_cap = 1.0;

  /// Throws std::invalid_argument on inconsistent parameters.
  void check() const;
};

struct LocalRates {
  double gamma = 0.0;
  double r = 0.0;
  double F = 0.0;
  double mu = 0.0;
};

/// Evaluates all rates at x against a density snapshot.
LocalRates local_rates(const DemographyModel& model, const DensityField& field, const Point& x);
/// r at a landing point y.
double establishment(const DemographyModel& model, const DensityField& field, const Point& y);

/// mu_theta = max(0, r gamma - F / theta) at x.
double death_rate(const DemographyModel& model, const Point& x, const PointPopulation& pop);

/// Offspring location from x, resampled until it lands in the box (100 tries, then clamped).
Point disperse_in_box(const DispersalLaw& law, const Point& x, const Box& box, Rng& rng);

/// Largest dt accepted by the discrete steppers: theta (gamma_cap + mu_cap) dt <= 0.1.
double max_stable_dt(const DemographyModel& model);

/// One synchronous tau-leap step: every individual reproduces with probability
/// 1 - exp(-theta gamma dt) and dies with probability 1 - exp(-theta mu dt); all
/// densities are read from the pre-step population.
PointPopulation step_discrete(const DemographyModel& model, const PointPopulation& pop, double dt, Rng& rng);

enum class EventKind {
  birth,
  birth_not_established,
  birth_rejected,
  death,
  death_rejected,
  extinct,
  /// The next proposal would fall after the stop time; the clock was advanced to it.
  stopped
};

struct ExactStepResult {
  double elapsed = 0.0;
  EventKind kind = EventKind::extinct;
};

/// Gillespie simulation with thinning against the bounding rate theta * n * (gamma_cap + mu_cap).
/// Works on the population in place and keeps its cell list current between events.
class ExactStepper {
 public:
  ExactStepper(const DemographyModel& model, PointPopulation& pop);

  /// One proposal. On an empty population returns EventKind::extinct with zero elapsed time.
  /// With a stop time, a proposal landing after it is discarded (the bound is a Poisson
  /// clock, so redrawing later is exact) and the population time is set to `stop`.
  ExactStepResult step(Rng& rng, double stop = std::numeric_limits<double>::infinity());
  const PointPopulation& population() const { return *pop_; }

 private:
  const DemographyModel* model_;
  PointPopulation* pop_;
  std::vector<Kernel> kernels_;
  DensityField field_;
};

ExactStepResult step_exact(const DemographyModel& model, PointPopulation& pop, Rng& rng);

enum class Stepper { discrete, exact };

struct IbmTrajectory {
  std::vector<PointPopulation> snapshots;
  bool extinct = false;
  double extinction_time = 0.0;
};

struct IbmRunOptions {
  double horizon = 1.0;
  double snapshot_every = 1.0;
  Stepper stepper = Stepper::discrete;
  /// Discrete stepper only; zero means max_stable_dt(model).
  double dt = 0.0;
};

IbmTrajectory run_ibm(const DemographyModel& model, const PointPopulation& initial, const IbmRunOptions& opts,
                      Rng& rng);

/// (rho * eta) at every node of `grid` (1D populations).
ScalarField1D density_profile(const PointPopulation& pop, const Grid1D& grid, const Kernel& kernel);

/// n atoms i.i.d. uniform in the box.
PointPopulation uniform_population(std::size_t n, double N, const Box& box, Rng& rng);

}  // namespace popdyn
