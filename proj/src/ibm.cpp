#include "popdyn/ibm.hpp"

#include <cmath>
#include <stdexcept>

namespace popdyn {

namespace {

void require_finite(double v) {
  if (!std::isfinite(v)) throw std::runtime_error("demography produced non-finite rate");
}

double density_for(const RateFunction& rate, const Kernel& kernel, const DensityField& field, const Point& x) {
  return rate.density_dependent ? field.density(kernel, x) : 0.0;
}

std::vector<Kernel> model_kernels(const DemographyModel& m) { return {m.kernel_gamma, m.kernel_r, m.kernel_F}; }

}  // namespace

RateFunction RateFunction::constant(double value) {
  return {[value](const Point&, double) { return value; }, false};
}

RateFunction RateFunction::of_density(std::function<double(double)> f) {
  return {[f = std::move(f)](const Point&, double m) { return f(m); }, true};
}

void DemographyModel::check() const {
  if (!gamma.fn || !r.fn || !F.fn) throw std::invalid_argument("demography rates must all be set");
  if (!(theta > 0.0)) throw std::invalid_argument("theta must be positive");
  if (std::abs(dispersal.theta() - theta) > 1e-12 * theta) {
    throw std::invalid_argument("dispersal theta differs from model theta");
  }
  if (!(gamma_cap > 0.0) || !(mu_cap > 0.0)) throw std::invalid_argument("rate caps must be positive");
}

LocalRates local_rates(const DemographyModel& model, const DensityField& field, const Point& x) {
  LocalRates lr;
  lr.gamma = std::min(model.gamma(x, density_for(model.gamma, model.kernel_gamma, field, x)), model.gamma_cap);
  lr.r = model.r(x, density_for(model.r, model.kernel_r, field, x));
  lr.F = model.F(x, density_for(model.F, model.kernel_F, field, x));
  require_finite(lr.gamma);
  require_finite(lr.r);
  require_finite(lr.F);
  lr.mu = std::max(0.0, lr.r * lr.gamma - lr.F / model.theta);
  return lr;
}

double establishment(const DemographyModel& model, const DensityField& field, const Point& y) {
  const double r = model.r(y, density_for(model.r, model.kernel_r, field, y));
  require_finite(r);
  return r;
}

double death_rate(const DemographyModel& model, const Point& x, const PointPopulation& pop) {
  const auto kernels = model_kernels(model);
  DensityField field(pop, kernels);
  return local_rates(model, field, x).mu;
}

Point disperse_in_box(const DispersalLaw& law, const Point& x, const Box& box, Rng& rng) {
  Point y = law.sample(x, rng);
  for (int tries = 1; tries < 100 && !box.contains(y); ++tries) y = law.sample(x, rng);
  return box.contains(y) ? y : box.clamp(y);
}

double max_stable_dt(const DemographyModel& model) {
  return 0.1 / (model.theta * (model.gamma_cap + model.mu_cap));
}

PointPopulation step_discrete(const DemographyModel& model, const PointPopulation& pop, double dt, Rng& rng) {
  if (!(dt > 0.0) || dt > max_stable_dt(model) * (1.0 + 1e-12)) {
    throw std::invalid_argument("dt too large for rates");
  }
  PointPopulation next;
  next.N = pop.N;
  next.domain = pop.domain;
  next.time = pop.time + dt;
  if (pop.empty()) return next;

  const auto kernels = model_kernels(model);
  DensityField field(pop, kernels);
  next.positions.reserve(pop.size() + pop.size() / 8 + 4);
  const double theta_dt = model.theta * dt;
  for (const Point& x : pop.positions) {
    const LocalRates lr = local_rates(model, field, x);
    const bool birth = bernoulli(rng, -std::expm1(-theta_dt * lr.gamma));
    const bool death = bernoulli(rng, -std::expm1(-theta_dt * lr.mu));
    if (!death) next.positions.push_back(x);
    if (birth) {
      Point y = disperse_in_box(model.dispersal, x, pop.domain, rng);
      if (bernoulli(rng, establishment(model, field, y))) next.positions.push_back(std::move(y));
    }
  }
  return next;
}

// --- exact stepper ----------------------------------------------------------

ExactStepper::ExactStepper(const DemographyModel& model, PointPopulation& pop)
    : model_(&model), pop_(&pop), kernels_(model_kernels(model)), field_(pop, kernels_) {}

ExactStepResult ExactStepper::step(Rng& rng, double stop) {
  const auto n = pop_->size();
  if (n == 0) return {0.0, EventKind::extinct};
  const DemographyModel& m = *model_;
  const double total_cap = m.gamma_cap + m.mu_cap;
  const double bound = m.theta * static_cast<double>(n) * total_cap;
  ExactStepResult res;
  res.elapsed = std::exponential_distribution<double>(bound)(rng);
  if (pop_->time + res.elapsed > stop) {
    res.elapsed = stop - pop_->time;
    pop_->time = stop;
    res.kind = EventKind::stopped;
    return res;
  }
  pop_->time += res.elapsed;

  const auto i = static_cast<std::uint32_t>(std::uniform_int_distribution<std::size_t>(0, n - 1)(rng));
  const Point x = pop_->positions[i];
  const LocalRates lr = local_rates(m, field_, x);
  if (lr.mu > m.mu_cap * (1.0 + 1e-12)) throw std::runtime_error("death rate exceeds mu_cap");

  const double pick = uniform01(rng) * total_cap;
  if (pick < m.gamma_cap) {
    if (pick >= lr.gamma) {
      res.kind = EventKind::birth_rejected;
      return res;
    }
    Point y = disperse_in_box(m.dispersal, x, pop_->domain, rng);
    if (!bernoulli(rng, establishment(m, field_, y))) {
      res.kind = EventKind::birth_not_established;
      return res;
    }
    pop_->positions.push_back(std::move(y));
    field_.on_append(static_cast<std::uint32_t>(n));
    res.kind = EventKind::birth;
    return res;
  }
  if (pick - m.gamma_cap >= lr.mu) {
    res.kind = EventKind::death_rejected;
    return res;
  }
  const auto last = static_cast<std::uint32_t>(n - 1);
  pop_->positions[i] = pop_->positions[last];
  pop_->positions.pop_back();
  field_.on_swap_remove(i, x, last);
  res.kind = EventKind::death;
  return res;
}

ExactStepResult step_exact(const DemographyModel& model, PointPopulation& pop, Rng& rng) {
  ExactStepper stepper(model, pop);
  return stepper.step(rng);
}

// --- runs -------------------------------------------------------------------

IbmTrajectory run_ibm(const DemographyModel& model, const PointPopulation& initial, const IbmRunOptions& opts,
                      Rng& rng) {
  if (!(opts.horizon >= 0.0)) throw std::invalid_argument("horizon must be nonnegative");
  if (!(opts.snapshot_every > 0.0)) throw std::invalid_argument("snapshot_every must be positive");
  model.check();
  initial.check();

  IbmTrajectory traj;
  PointPopulation pop = initial;
  const double t0 = initial.time;
  traj.snapshots.push_back(pop);
  if (opts.horizon == 0.0) return traj;

  const auto n_snap = static_cast<long>(std::floor(opts.horizon / opts.snapshot_every + 1e-9));
  auto snapshot_time = [&](long k) { return t0 + static_cast<double>(k) * opts.snapshot_every; };

  if (opts.stepper == Stepper::discrete) {
    const double dt_max = max_stable_dt(model);
    double dt = opts.dt > 0.0 ? opts.dt : dt_max;
    const auto steps_per_snap = static_cast<long>(std::ceil(opts.snapshot_every / dt - 1e-9));
    dt = opts.snapshot_every / static_cast<double>(steps_per_snap);
    for (long k = 1; k <= n_snap; ++k) {
      for (long s = 0; s < steps_per_snap; ++s) {
        if (pop.empty()) break;
        pop = step_discrete(model, pop, dt, rng);
      }
      pop.time = snapshot_time(k);
      if (pop.empty() && !traj.extinct) {
        traj.extinct = true;
        traj.extinction_time = pop.time;
      }
      traj.snapshots.push_back(pop);
    }
    return traj;
  }

  ExactStepper stepper(model, pop);
  for (long k = 1; k <= n_snap; ++k) {
    const double stop = snapshot_time(k);
    while (true) {
      const double before = pop.time;
      const EventKind kind = stepper.step(rng, stop).kind;
      if (kind == EventKind::stopped) break;
      if (kind == EventKind::extinct) {
        if (!traj.extinct) {
          traj.extinct = true;
          traj.extinction_time = before;
        }
        pop.time = stop;
        break;
      }
    }
    traj.snapshots.push_back(pop);
  }
  return traj;
}

ScalarField1D density_profile(const PointPopulation& pop, const Grid1D& grid, const Kernel& kernel) {
  if (pop.dim() != 1) throw std::invalid_argument("density_profile needs a 1D population");
  ScalarField1D out;
  out.grid = grid;
  out.t = pop.time;
  out.values.resize(grid.n);
  const Kernel ks[] = {kernel};
  DensityField field(pop, ks);
  for (std::size_t i = 0; i < grid.n; ++i) out.values[i] = field.density(kernel, make_point({grid.x(i)}));
  return out;
}

PointPopulation uniform_population(std::size_t n, double N, const Box& box, Rng& rng) {
  PointPopulation pop;
  pop.N = N;
  pop.domain = box;
  pop.positions.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    Point p(box.dim());
    for (int a = 0; a < box.dim(); ++a) p[a] = box.lo[a] + (box.hi[a] - box.lo[a]) * uniform01(rng);
    pop.positions.push_back(p);
  }
  return pop;
}

}  // namespace popdyn
