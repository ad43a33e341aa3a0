#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "popdyn/field.hpp"
#include "popdyn/kernels.hpp"

namespace popdyn {

enum class PdeKind { reaction_diffusion, nonlocal_rd, pme_logistic, nonlocal_pme };
enum class KernelShape { gaussian, indicator };

/// Rescaled interaction kernel rho_eps: Gaussian with variance eps^2 or indicator on [-eps, eps].
Kernel scaled_kernel(KernelShape shape, double epsilon);

struct PdeProblem {
  PdeKind kind = PdeKind::reaction_diffusion;
  /// F(m) in phi * F(m); unused by the PME kinds, whose reaction is 1 - m.
  std::function<double(double)> reaction = [](double) { return 0.0; };
  /// sigma^2 in sigma^2 Laplacian.
  double diffusion = 1.0;
  /// Constant dispersal mean b; enters as -b d/dx of the dispersed quantity.
  double drift = 0.0;
  KernelShape shape = KernelShape::gaussian;
  /// Interaction width for the nonlocal kinds; zero selects the local equation.
  double epsilon = 0.0;
};

struct PdeRunOptions {
  double horizon = 1.0;
  double dt = 0.0;  // zero: 0.9 x the stability bound
  double snapshot_every = 1.0;
};

struct PdeTrajectory {
  std::vector<ScalarField1D> snapshots;
  /// Total mass removed by clipping negative values to zero.
  double clipped_mass = 0.0;
  std::size_t steps = 0;
};

/// Stability bound h^2 / (2 sigma^2) for the explicit reaction-diffusion scheme (with upwind drift).
double rd_stable_dt(const PdeProblem& problem, double h);

/// d phi/dt = sigma^2 phi'' - b phi' + phi F(phi), Neumann ends.
PdeTrajectory solve_rd(const PdeProblem& problem, const ScalarField1D& initial, const PdeRunOptions& opts);
/// Same with F evaluated at rho_eps * phi. epsilon = 0 runs solve_rd.
PdeTrajectory solve_nonlocal_rd(const PdeProblem& problem, const ScalarField1D& initial, const PdeRunOptions& opts);
/// d phi/dt = sigma^2 (phi^2)'' - b (phi^2)' + phi (1 - phi), conservative form, adaptive dt.
PdeTrajectory solve_pme_logistic(const PdeProblem& problem, const ScalarField1D& initial, const PdeRunOptions& opts);
/// d psi/dt = sigma^2 (psi g)'' - b (psi g)' + psi (1 - g), g = rho_eps * psi.
PdeTrajectory solve_nonlocal_pme(const PdeProblem& problem, const ScalarField1D& initial, const PdeRunOptions& opts);
/// Dispatch on problem.kind.
PdeTrajectory solve(const PdeProblem& problem, const ScalarField1D& initial, const PdeRunOptions& opts);

/// Discrete convolution with trapezoid weights normalised to sum to one; mirror images at the
/// ends match the Neumann condition.
class GridConvolution {
 public:
  GridConvolution(const Kernel& kernel, double h);
  void apply(const std::vector<double>& in, std::vector<double>& out) const;
  std::size_t half_width() const { return weights_.size() - 1; }

 private:
  std::vector<double> weights_;  // weights_[k] for offset +-k
};

struct WaveSpeed {
  double speed = 0.0;
  std::vector<double> times;
  std::vector<double> fronts;
};

/// Rightmost down-crossing of `level` by linear interpolation; throws "no front detected".
double front_position(const ScalarField1D& field, double level = 0.5);
/// Least-squares slope of the front position over the last half of the snapshots (>= 10 needed).
WaveSpeed measure_wave_speed(const std::vector<ScalarField1D>& trajectory, double level = 0.5);

enum class WaveKind { pme, allen_cahn };

/// w^P(x) = (1 - exp((x - x0 - t)/2))_+ , or w^A(x) = 1 / (1 + exp(x - x0 - s t)).
double analytic_wave_value(WaveKind kind, double x, double t, double x0 = 0.0, double s = 0.5);
ScalarField1D analytic_wave(WaveKind kind, const Grid1D& grid, double t, double x0 = 0.0, double s = 0.5);

/// sup |phi(x) - w(x - X + xi_half)| where X is the measured 0.5 crossing and w(xi_half) = 0.5.
double front_frame_error(const ScalarField1D& field, const std::function<double(double)>& profile,
                         double xi_half);

double linf_distance(const ScalarField1D& a, const ScalarField1D& b);
/// sum_j | int (a - b) v_j dx | over the given test functions (trapezoid rule).
double weak_distance(const ScalarField1D& a, const ScalarField1D& b,
                     const std::vector<std::function<double(double)>>& tests);

struct EpsilonSweep {
  std::vector<double> epsilons;
  std::vector<double> errors;
  bool strictly_decreasing() const;
};

/// L-infinity error at the horizon between the nonlocal and local reaction-diffusion solutions.
EpsilonSweep sweep_nonlocal_rd(const PdeProblem& problem, const ScalarField1D& initial, const PdeRunOptions& opts,
                               const std::vector<double>& epsilons);
/// Weak-norm error at the horizon between the nonlocal and local PME solutions.
EpsilonSweep sweep_nonlocal_pme(const PdeProblem& problem, const ScalarField1D& initial, const PdeRunOptions& opts,
                                const std::vector<double>& epsilons,
                                const std::vector<std::function<double(double)>>& tests);

}  // namespace popdyn
