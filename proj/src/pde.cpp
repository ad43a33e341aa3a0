#include "popdyn/pde.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace popdyn {

Kernel scaled_kernel(KernelShape shape, double epsilon) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("kernel width must be positive");
  if (shape == KernelShape::gaussian) return GaussianKernel{1, epsilon * epsilon};
  return IndicatorKernel1D{epsilon};
}

// --- convolution ------------------------------------------------------------

GridConvolution::GridConvolution(const Kernel& kernel, double h) {
  // 6 sigma is enough here because the weights are renormalised.
  double radius = support_radius(kernel);
  if (const auto* g = std::get_if<GaussianKernel>(&kernel)) radius = 6.0 * g->sigma();
  const auto reach = static_cast<std::size_t>(std::floor(radius / h + 1e-9));
  weights_.resize(reach + 1);
  for (std::size_t k = 0; k <= reach; ++k) {
    Point off(1);
    off[0] = static_cast<double>(k) * h;
    double w = evaluate(kernel, off);
    if (std::holds_alternative<IndicatorKernel1D>(kernel) && std::abs(off[0] - radius) < 1e-9 * h) w *= 0.5;
    weights_[k] = w;
  }
  double total = weights_[0];
  for (std::size_t k = 1; k <= reach; ++k) total += 2.0 * weights_[k];
  for (double& w : weights_) w /= total;
}

namespace {

/// Mirror an index into [0, n-1] about the end nodes.
std::size_t mirror(std::ptrdiff_t j, std::ptrdiff_t n) {
  if (n == 1) return 0;
  const std::ptrdiff_t period = 2 * (n - 1);
  j %= period;
  if (j < 0) j += period;
  return static_cast<std::size_t>(j < n ? j : period - j);
}

}  // namespace

void GridConvolution::apply(const std::vector<double>& in, std::vector<double>& out) const {
  const auto n = static_cast<std::ptrdiff_t>(in.size());
  const auto reach = static_cast<std::ptrdiff_t>(weights_.size() - 1);
  out.assign(in.size(), 0.0);
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    double s = weights_[0] * in[static_cast<std::size_t>(i)];
    if (i - reach >= 0 && i + reach < n) {
      for (std::ptrdiff_t k = 1; k <= reach; ++k) {
        s += weights_[static_cast<std::size_t>(k)] *
             (in[static_cast<std::size_t>(i - k)] + in[static_cast<std::size_t>(i + k)]);
      }
    } else {
      for (std::ptrdiff_t k = 1; k <= reach; ++k) {
        s += weights_[static_cast<std::size_t>(k)] * (in[mirror(i - k, n)] + in[mirror(i + k, n)]);
      }
    }
    out[static_cast<std::size_t>(i)] = s;
  }
}

// --- solvers ----------------------------------------------------------------

namespace {

constexpr double kBlowUp = 1e6;

void check_initial(const ScalarField1D& initial) {
  if (initial.grid.n < 3 || initial.values.size() != initial.grid.n) {
    throw std::invalid_argument("initial field needs at least 3 nodes");
  }
  for (double v : initial.values) {
    if (!std::isfinite(v) || v < 0.0) throw std::invalid_argument("initial field must be finite and nonnegative");
  }
}

/// (q_{i+1} - 2 q_i + q_{i-1}) / h^2 with mirrored ghost nodes.
inline double laplacian(const std::vector<double>& q, std::size_t i, double inv_h2) {
  const std::size_t n = q.size();
  const double left = i == 0 ? q[1] : q[i - 1];
  const double right = i + 1 == n ? q[n - 2] : q[i + 1];
  return (left - 2.0 * q[i] + right) * inv_h2;
}

/// Upwind d q/dx for transport at velocity b.
inline double upwind(const std::vector<double>& q, std::size_t i, double b, double inv_h) {
  const std::size_t n = q.size();
  if (b > 0.0) {
    const double left = i == 0 ? q[1] : q[i - 1];
    return (q[i] - left) * inv_h;
  }
  const double right = i + 1 == n ? q[n - 2] : q[i + 1];
  return (right - q[i]) * inv_h;
}

double clip_and_check(std::vector<double>& v, double h) {
  double clipped = 0.0;
  for (double& x : v) {
    if (!std::isfinite(x) || x > kBlowUp) throw std::runtime_error("solution blow-up");
    if (x < 0.0) {
      clipped -= x * h;
      x = 0.0;
    }
  }
  return clipped;
}

struct Clock {
  double t = 0.0;
  double horizon;
  double every;
  long next = 1;

  double next_snapshot() const { return std::min(horizon, every * static_cast<double>(next)); }
};

/// Drives an explicit update with step dt_of(state) until the horizon, snapshotting on schedule.
template <class Step, class MaxDt>
PdeTrajectory integrate(const ScalarField1D& initial, const PdeRunOptions& opts, Step&& step, MaxDt&& max_dt) {
  if (!(opts.horizon >= 0.0) || !(opts.snapshot_every > 0.0)) {
    throw std::invalid_argument("horizon and snapshot interval must be positive");
  }
  PdeTrajectory traj;
  ScalarField1D cur = initial;
  traj.snapshots.push_back(cur);
  Clock clock{initial.t, initial.t + opts.horizon, opts.snapshot_every};
  const double start = initial.t;
  const double dt_floor = 1e-7 * (opts.dt > 0.0 ? opts.dt : max_dt(cur.values));
  while (clock.t < clock.horizon - 1e-12) {
    const double bound = max_dt(cur.values);
    double dt = opts.dt > 0.0 ? std::min(opts.dt, bound) : bound;
    if (dt < dt_floor) throw std::runtime_error("adaptive dt floor reached");
    const double target = std::min(clock.horizon, start + clock.every * static_cast<double>(clock.next));
    bool snap = false;
    if (clock.t + dt >= target - 1e-12) {
      dt = target - clock.t;
      snap = true;
    }
    traj.clipped_mass += step(cur.values, dt);
    ++traj.steps;
    clock.t = snap ? target : clock.t + dt;
    cur.t = clock.t;
    if (snap) {
      traj.snapshots.push_back(cur);
      ++clock.next;
    }
  }
  return traj;
}

}  // namespace

double rd_stable_dt(const PdeProblem& p, double h) {
  return 1.0 / (2.0 * p.diffusion / (h * h) + std::abs(p.drift) / h);
}

namespace {

PdeTrajectory run_rd(const PdeProblem& p, const ScalarField1D& initial, const PdeRunOptions& opts,
                     const GridConvolution* conv) {
  check_initial(initial);
  if (!(p.diffusion > 0.0)) throw std::invalid_argument("diffusion must be positive");
  const double h = initial.grid.h;
  const double bound = rd_stable_dt(p, h);
  if (opts.dt > 0.9 * bound * (1.0 + 1e-12)) throw std::invalid_argument("CFL condition violated: dt too large");
  const double inv_h2 = 1.0 / (h * h);
  const double inv_h = 1.0 / h;
  std::vector<double> next(initial.grid.n), smoothed;
  auto step = [&](std::vector<double>& v, double dt) {
    const std::vector<double>* m = &v;
    if (conv != nullptr) {
      conv->apply(v, smoothed);
      m = &smoothed;
    }
    for (std::size_t i = 0; i < v.size(); ++i) {
      double rhs = p.diffusion * laplacian(v, i, inv_h2) + v[i] * p.reaction((*m)[i]);
      if (p.drift != 0.0) rhs -= p.drift * upwind(v, i, p.drift, inv_h);
      next[i] = v[i] + dt * rhs;
    }
    v.swap(next);
    return clip_and_check(v, h);
  };
  return integrate(initial, opts, step, [&](const std::vector<double>&) { return 0.9 * bound; });
}

PdeTrajectory run_pme(const PdeProblem& p, const ScalarField1D& initial, const PdeRunOptions& opts,
                      const GridConvolution* conv) {
  check_initial(initial);
  const double h = initial.grid.h;
  const double inv_h2 = 1.0 / (h * h);
  const double inv_h = 1.0 / h;
  std::vector<double> g, flux(initial.grid.n), next(initial.grid.n);
  auto smooth = [&](const std::vector<double>& v) {
    if (conv != nullptr) {
      conv->apply(v, g);
    } else {
      g = v;
    }
  };
  auto max_dt = [&](const std::vector<double>& v) {
    smooth(v);
    const double top = std::max(*std::max_element(v.begin(), v.end()), *std::max_element(g.begin(), g.end()));
    const double scale = std::max(top, 1e-12);
    // Effective diffusivity of sigma^2 (phi g)'' is at most 2 sigma^2 max(phi, g).
    return 0.9 / (4.0 * p.diffusion * scale * inv_h2 + 2.0 * std::abs(p.drift) * scale * inv_h);
  };
  auto step = [&](std::vector<double>& v, double dt) {
    smooth(v);
    for (std::size_t i = 0; i < v.size(); ++i) flux[i] = v[i] * g[i];
    for (std::size_t i = 0; i < v.size(); ++i) {
      double rhs = p.diffusion * laplacian(flux, i, inv_h2) + v[i] * (1.0 - g[i]);
      if (p.drift != 0.0) rhs -= p.drift * upwind(flux, i, p.drift, inv_h);
      next[i] = v[i] + dt * rhs;
    }
    v.swap(next);
    return clip_and_check(v, h);
  };
  return integrate(initial, opts, step, max_dt);
}

}  // namespace

PdeTrajectory solve_rd(const PdeProblem& problem, const ScalarField1D& initial, const PdeRunOptions& opts) {
  return run_rd(problem, initial, opts, nullptr);
}

PdeTrajectory solve_nonlocal_rd(const PdeProblem& problem, const ScalarField1D& initial, const PdeRunOptions& opts) {
  if (problem.epsilon == 0.0) return solve_rd(problem, initial, opts);
  const GridConvolution conv(scaled_kernel(problem.shape, problem.epsilon), initial.grid.h);
  return run_rd(problem, initial, opts, &conv);
}

PdeTrajectory solve_pme_logistic(const PdeProblem& problem, const ScalarField1D& initial, const PdeRunOptions& opts) {
  return run_pme(problem, initial, opts, nullptr);
}

PdeTrajectory solve_nonlocal_pme(const PdeProblem& problem, const ScalarField1D& initial, const PdeRunOptions& opts) {
  if (problem.epsilon == 0.0) return solve_pme_logistic(problem, initial, opts);
  const GridConvolution conv(scaled_kernel(problem.shape, problem.epsilon), initial.grid.h);
  return run_pme(problem, initial, opts, &conv);
}

PdeTrajectory solve(const PdeProblem& problem, const ScalarField1D& initial, const PdeRunOptions& opts) {
  switch (problem.kind) {
    case PdeKind::reaction_diffusion:
      return solve_rd(problem, initial, opts);
    case PdeKind::nonlocal_rd:
      return solve_nonlocal_rd(problem, initial, opts);
    case PdeKind::pme_logistic:
      return solve_pme_logistic(problem, initial, opts);
    case PdeKind::nonlocal_pme:
      return solve_nonlocal_pme(problem, initial, opts);
  }
  throw std::invalid_argument("unknown PDE kind");
}

// --- fronts -----------------------------------------------------------------

double front_position(const ScalarField1D& field, double level) {
  const auto& v = field.values;
  for (std::size_t i = v.size() - 1; i >= 1; --i) {
    if (v[i - 1] >= level && v[i] < level) {
      const double frac = (v[i - 1] - level) / (v[i - 1] - v[i]);
      return field.grid.x(i - 1) + frac * field.grid.h;
    }
  }
  throw std::runtime_error("no front detected");
}

WaveSpeed measure_wave_speed(const std::vector<ScalarField1D>& trajectory, double level) {
  if (trajectory.size() < 10) throw std::invalid_argument("need at least 10 snapshots to measure a wave speed");
  WaveSpeed ws;
  for (const auto& f : trajectory) {
    ws.times.push_back(f.t);
    ws.fronts.push_back(front_position(f, level));
  }
  const std::size_t first = ws.times.size() / 2;
  const double n = static_cast<double>(ws.times.size() - first);
  double st = 0.0, sx = 0.0;
  for (std::size_t i = first; i < ws.times.size(); ++i) {
    st += ws.times[i];
    sx += ws.fronts[i];
  }
  const double mt = st / n, mx = sx / n;
  double num = 0.0, den = 0.0;
  for (std::size_t i = first; i < ws.times.size(); ++i) {
    num += (ws.times[i] - mt) * (ws.fronts[i] - mx);
    den += (ws.times[i] - mt) * (ws.times[i] - mt);
  }
  ws.speed = den > 0.0 ? num / den : 0.0;
  return ws;
}

double analytic_wave_value(WaveKind kind, double x, double t, double x0, double s) {
  if (kind == WaveKind::pme) return std::max(0.0, -std::expm1(0.5 * (x - x0 - t)));
  const double z = x - x0 - s * t;
  return z > 0.0 ? std::exp(-z) / (1.0 + std::exp(-z)) : 1.0 / (1.0 + std::exp(z));
}

ScalarField1D analytic_wave(WaveKind kind, const Grid1D& grid, double t, double x0, double s) {
  ScalarField1D f;
  f.grid = grid;
  f.t = t;
  f.values.resize(grid.n);
  for (std::size_t i = 0; i < grid.n; ++i) f.values[i] = analytic_wave_value(kind, grid.x(i), t, x0, s);
  return f;
}

double front_frame_error(const ScalarField1D& field, const std::function<double(double)>& profile, double xi_half) {
  const double X = front_position(field, 0.5);
  double err = 0.0;
  for (std::size_t i = 0; i < field.grid.n; ++i) {
    err = std::max(err, std::abs(field.values[i] - profile(field.grid.x(i) - X + xi_half)));
  }
  return err;
}

double linf_distance(const ScalarField1D& a, const ScalarField1D& b) {
  if (a.values.size() != b.values.size()) throw std::invalid_argument("grid mismatch");
  double d = 0.0;
  for (std::size_t i = 0; i < a.values.size(); ++i) d = std::max(d, std::abs(a.values[i] - b.values[i]));
  return d;
}

double weak_distance(const ScalarField1D& a, const ScalarField1D& b,
                     const std::vector<std::function<double(double)>>& tests) {
  if (a.values.size() != b.values.size()) throw std::invalid_argument("grid mismatch");
  double total = 0.0;
  const std::size_t n = a.values.size();
  for (const auto& v : tests) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double w = (i == 0 || i + 1 == n) ? 0.5 : 1.0;
      s += w * (a.values[i] - b.values[i]) * v(a.grid.x(i));
    }
    total += std::abs(s * a.grid.h);
  }
  return total;
}

bool EpsilonSweep::strictly_decreasing() const {
  for (std::size_t i = 1; i < errors.size(); ++i) {
    if (!(errors[i] < errors[i - 1])) return false;
  }
  return !errors.empty();
}

EpsilonSweep sweep_nonlocal_rd(const PdeProblem& problem, const ScalarField1D& initial, const PdeRunOptions& opts,
                               const std::vector<double>& epsilons) {
  PdeProblem local = problem;
  local.epsilon = 0.0;
  const ScalarField1D ref = solve_rd(local, initial, opts).snapshots.back();
  EpsilonSweep out;
  for (double eps : epsilons) {
    PdeProblem p = problem;
    p.epsilon = eps;
    out.epsilons.push_back(eps);
    out.errors.push_back(linf_distance(solve_nonlocal_rd(p, initial, opts).snapshots.back(), ref));
  }
  return out;
}

EpsilonSweep sweep_nonlocal_pme(const PdeProblem& problem, const ScalarField1D& initial, const PdeRunOptions& opts,
                                const std::vector<double>& epsilons,
                                const std::vector<std::function<double(double)>>& tests) {
  PdeProblem local = problem;
  local.epsilon = 0.0;
  const ScalarField1D ref = solve_pme_logistic(local, initial, opts).snapshots.back();
  EpsilonSweep out;
  for (double eps : epsilons) {
    PdeProblem p = problem;
    p.epsilon = eps;
    out.epsilons.push_back(eps);
    out.errors.push_back(weak_distance(solve_nonlocal_pme(p, initial, opts).snapshots.back(), ref, tests));
  }
  return out;
}

}  // namespace popdyn
