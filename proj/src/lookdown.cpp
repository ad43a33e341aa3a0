#include "popdyn/lookdown.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include <Eigen/Cholesky>

namespace popdyn {

// --- labels -----------------------------------------------------------------

LabelId LabelTable::add_root(double birth_time) {
  nodes_.push_back({kNoLabel, ++roots_, 0, birth_time});
  return static_cast<LabelId>(nodes_.size() - 1);
}

LabelId LabelTable::add_child(LabelId parent, double birth_time) {
  const std::uint32_t j = ++nodes_.at(parent).children;
  nodes_.push_back({parent, j, 0, birth_time});
  return static_cast<LabelId>(nodes_.size() - 1);
}

std::vector<std::uint32_t> LabelTable::sequence(LabelId id) const {
  std::vector<std::uint32_t> seq;
  for (LabelId a = id; a != kNoLabel; a = nodes_.at(a).parent) seq.push_back(nodes_[a].index);
  std::reverse(seq.begin(), seq.end());
  return seq;
}

std::string LabelTable::to_string(LabelId id) const {
  if (id == kNoLabel) return {};
  std::string out;
  for (std::uint32_t k : sequence(id)) {
    if (!out.empty()) out += '.';
    out += std::to_string(k);
  }
  return out;
}

const LevelledIndividual* LevelledPopulation::find(LabelId label) const {
  for (const auto& ind : individuals) {
    if (ind.label == label) return &ind;
  }
  return nullptr;
}

LevelledPopulation make_levelled(const PointPopulation& pop, double theta, Rng& rng) {
  LevelledPopulation out;
  out.N = pop.N;
  out.theta = theta;
  out.time = pop.time;
  out.domain = pop.domain;
  out.log_start = pop.time;
  out.individuals.reserve(pop.size());
  for (const Point& x : pop.positions) {
    LevelledIndividual ind;
    ind.position = x;
    ind.level = pop.N * uniform01(rng);
    ind.label = out.labels.add_root(pop.time);
    ind.birth_time = pop.time;
    out.individuals.push_back(ind);
  }
  return out;
}

PointPopulation project(const LevelledPopulation& pop) {
  PointPopulation out;
  out.N = pop.N;
  out.time = pop.time;
  out.domain = pop.domain;
  out.positions.reserve(pop.individuals.size());
  for (const auto& ind : pop.individuals) out.positions.push_back(ind.position);
  return out;
}

// --- level dynamics ---------------------------------------------------------

double expect_dispersal(const DispersalLaw& law, const Point& x, const std::function<double(const Point&)>& g) {
  static constexpr double kNode = 1.7320508075688772;  // sqrt(3)
  static constexpr double kNodes[3] = {-kNode, 0.0, kNode};
  static constexpr double kWeights[3] = {1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0};
  const int d = law.dim();
  const double theta = law.theta();
  const Matrix cov = law.cov(x) / theta;
  Eigen::LLT<Matrix> llt(cov);
  if (llt.info() != Eigen::Success) throw std::runtime_error("covariance not positive definite");
  const Matrix L = llt.matrixL();
  const Point centre = x + law.mean(x) / theta;

  int total = 1;
  for (int a = 0; a < d; ++a) total *= 3;
  double sum = 0.0;
  Point z(d);
  for (int k = 0; k < total; ++k) {
    double w = 1.0;
    int code = k;
    for (int a = 0; a < d; ++a) {
      z[a] = kNodes[code % 3];
      w *= kWeights[code % 3];
      code /= 3;
    }
    sum += w * g(centre + L * z);
  }
  return sum;
}

namespace {

LevelCoefficients coefficients_from(const DemographyModel& model, const DensityField& field, const Point& x,
                                    const LocalRates& lr, double N) {
  LevelCoefficients out;
  out.expected_r = expect_dispersal(model.dispersal, x, [&](const Point& y) { return establishment(model, field, y); });
  out.c = model.theta / N * lr.gamma * out.expected_r;
  // F enters unclamped: the mu >= 0 clamp is not applied inside b.
  out.b = model.theta * lr.gamma * (out.expected_r - lr.r) + lr.F;
  return out;
}

}  // namespace

LevelCoefficients level_coefficients(const DemographyModel& model, const DensityField& field, const Point& x,
                                     double N) {
  return coefficients_from(model, field, x, local_rates(model, field, x), N);
}

LevelCoefficients level_coefficients(const DemographyModel& model, const Point& x, const PointPopulation& pop) {
  const std::vector<Kernel> ks{model.kernel_gamma, model.kernel_r, model.kernel_F};
  DensityField field(pop, ks);
  return level_coefficients(model, field, x, pop.N);
}

LevelUpdate evolve_level(double u0, double b, double c, double dt) {
  if (!(u0 >= 0.0)) throw std::invalid_argument("level must be nonnegative");
  if (u0 == 0.0) return {0.0, false};
  // v = 1/u solves v' = b v - c.
  const double bt = b * dt;
  const double growth = bt == 0.0 ? dt : std::expm1(bt) / b;
  const double v = std::exp(bt) / u0 - c * growth;
  if (!(v > 0.0)) return {std::numeric_limits<double>::infinity(), true};
  return {1.0 / v, false};
}

void lookdown_step(LevelledPopulation& pop, const DemographyModel& model, double dt, Rng& rng) {
  if (!(dt > 0.0) || dt > max_stable_dt(model) * (1.0 + 1e-12)) {
    throw std::invalid_argument("dt too large for rates");
  }
  const PointPopulation snapshot = project(pop);
  const std::vector<Kernel> ks{model.kernel_gamma, model.kernel_r, model.kernel_F};
  DensityField field(snapshot, ks);
  const double N = pop.N;
  const double theta = model.theta;
  const double t = pop.time;

  const std::size_t n_old = pop.individuals.size();
  std::vector<LevelCoefficients> coeff(n_old);
  std::vector<char> moved(n_old, 0);
  for (std::size_t i = 0; i < n_old; ++i) {
    const Point x = pop.individuals[i].position;
    const LocalRates lr = local_rates(model, field, x);
    coeff[i] = coefficients_from(model, field, x, lr, N);
    const double u = pop.individuals[i].level;
    const double rate = 2.0 * theta * std::max(0.0, 1.0 - u / N) * lr.gamma;
    if (!bernoulli(rng, -std::expm1(-rate * dt))) continue;
    Point y = disperse_in_box(model.dispersal, x, pop.domain, rng);
    if (!bernoulli(rng, establishment(model, field, y))) continue;

    const double u1 = u + (N - u) * uniform01(rng);
    const bool swap = bernoulli(rng, 0.5);
    const LabelId parent = pop.individuals[i].label;
    const LabelId child = pop.labels.add_child(parent, t);
    pop.log.push_back({t, LogEvent::birth, parent, child, swap, x, y, u1});

    LevelledIndividual baby;
    baby.level = u1;
    baby.label = child;
    baby.birth_time = t;
    if (swap) {
      pop.individuals[i].position = y;
      moved[i] = 1;
      baby.position = x;
    } else {
      baby.position = y;
    }
    pop.individuals.push_back(std::move(baby));
  }

  const double t_end = t + dt;
  std::vector<LevelledIndividual> survivors;
  survivors.reserve(pop.individuals.size());
  for (std::size_t i = 0; i < pop.individuals.size(); ++i) {
    auto& ind = pop.individuals[i];
    const LevelCoefficients lc = (i < n_old && !moved[i]) ? coeff[i] : level_coefficients(model, field, ind.position, N);
    const LevelUpdate up = evolve_level(ind.level, lc.b, lc.c, dt);
    if (up.exploded || up.level > N) {
      pop.log.push_back({t_end, LogEvent::death, kNoLabel, ind.label, false, Point(), ind.position, up.level});
      continue;
    }
    ind.level = up.level;
    survivors.push_back(std::move(ind));
  }
  pop.individuals = std::move(survivors);
  pop.time = t_end;
}

// --- lineages ---------------------------------------------------------------

const Point& LineagePath::at(double s_query) const {
  auto it = std::upper_bound(s.begin(), s.end(), s_query);
  const auto k = static_cast<std::size_t>(std::max<std::ptrdiff_t>(0, (it - s.begin()) - 1));
  return x[k];
}

LineageIndex::LineageIndex(const LevelledPopulation& pop)
    : pop_(&pop), birth_record_(pop.labels.size(), -1), swaps_(pop.labels.size()) {
  for (std::size_t k = 0; k < pop.log.size(); ++k) {
    const EventRecord& e = pop.log[k];
    if (e.event != LogEvent::birth) continue;
    birth_record_[e.child] = static_cast<std::int64_t>(k);
    if (e.swap) swaps_[e.parent].push_back(static_cast<std::uint32_t>(k));
  }
}

LineagePath LineageIndex::trace(LabelId label, const Point& position, double back_to) const {
  const LevelledPopulation& pop = *pop_;
  if (back_to < pop.log_start - 1e-12) throw std::runtime_error("lineage record gap");
  const double now = pop.time;
  LineagePath path;
  path.s.push_back(0.0);
  path.x.push_back(position);

  LabelId current = label;
  double horizon = now;  // records strictly before this time are still to be visited
  auto jump_to = [&](double t, const Point& x) {
    const double s = now - t;
    if (path.s.back() == s) {
      path.x.back() = x;
    } else {
      path.s.push_back(s);
      path.x.push_back(x);
    }
  };
  while (true) {
    if (current >= swaps_.size()) throw std::runtime_error("lineage record gap");
    const auto& sw = swaps_[current];
    // Swap records of `current` with back_to < t <= horizon, latest first.
    for (auto it = sw.rbegin(); it != sw.rend(); ++it) {
      const EventRecord& e = pop.log[*it];
      if (e.t > horizon) continue;
      if (e.t <= back_to) break;
      jump_to(e.t, e.x_parent);
    }
    const double born = pop.labels.birth_time(current);
    if (born <= back_to) break;
    const std::int64_t rec = birth_record_[current];
    if (rec < 0) throw std::runtime_error("lineage record gap");
    const EventRecord& e = pop.log[static_cast<std::size_t>(rec)];
    jump_to(e.t, e.x_parent);
    current = e.parent;
    horizon = e.t;
  }
  return path;
}

LineagePath trace_lineage(const LevelledPopulation& pop, LabelId label, double back_to) {
  const LevelledIndividual* ind = pop.find(label);
  if (ind == nullptr) throw std::invalid_argument("individual not alive at query time");
  return LineageIndex(pop).trace(label, ind->position, back_to);
}

// --- level uniformity -------------------------------------------------------

namespace {

/// P(sqrt(n) D_n > lambda) in the n -> infinity limit.
double kolmogorov_q(double lambda) {
  if (lambda <= 0.0) return 1.0;
  if (lambda < 1.18) {
    const double pi = std::numbers::pi;
    double cdf = 0.0;
    for (int k = 1; k <= 20; ++k) {
      const double m = 2.0 * k - 1.0;
      cdf += std::exp(-m * m * pi * pi / (8.0 * lambda * lambda));
    }
    return std::clamp(1.0 - std::sqrt(2.0 * pi) / lambda * cdf, 0.0, 1.0);
  }
  double q = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    q += (k % 2 == 1 ? 2.0 : -2.0) * term;
    if (term < 1e-17) break;
  }
  return std::clamp(q, 0.0, 1.0);
}

}  // namespace

KsResult ks_uniform(std::vector<double> sample, double upper) {
  if (sample.empty()) throw std::invalid_argument("empty sample");
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double f = std::clamp(sample[i] / upper, 0.0, 1.0);
    d = std::max({d, (static_cast<double>(i) + 1.0) / n - f, f - static_cast<double>(i) / n});
  }
  KsResult res;
  res.statistic = d;
  const double sn = std::sqrt(n);
  // Stephens' finite-sample correction.
  res.p_value = kolmogorov_q((sn + 0.12 + 0.11 / sn) * d);
  return res;
}

KsResult levels_uniformity_stat(const LevelledPopulation& pop) {
  if (pop.individuals.size() < 20) throw std::invalid_argument("too few individuals for a KS test (need 20)");
  std::vector<double> levels;
  levels.reserve(pop.individuals.size());
  for (const auto& ind : pop.individuals) levels.push_back(ind.level);
  return ks_uniform(std::move(levels), pop.N);
}

LookdownRun run_lookdown(const DemographyModel& model, const PointPopulation& initial, double horizon,
                         double snapshot_every, double dt, Rng& rng) {
  if (!(horizon >= 0.0) || !(snapshot_every > 0.0)) throw std::invalid_argument("bad horizon or snapshot interval");
  model.check();
  initial.check();
  LookdownRun run;
  run.final_state = make_levelled(initial, model.theta, rng);
  auto record = [&](LevelledPopulation& s) {
    run.snapshots.push_back(project(s));
    if (s.individuals.size() >= 20) {
      run.level_ks.push_back(levels_uniformity_stat(s));
    } else {
      run.level_ks.push_back({std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN()});
    }
  };
  record(run.final_state);
  if (horizon == 0.0) return run;
  if (!(dt > 0.0)) dt = max_stable_dt(model);
  const auto steps_per_snap = static_cast<long>(std::ceil(snapshot_every / dt - 1e-9));
  dt = snapshot_every / static_cast<double>(steps_per_snap);
  const auto n_snap = static_cast<long>(std::floor(horizon / snapshot_every + 1e-9));
  for (long k = 1; k <= n_snap; ++k) {
    for (long s = 0; s < steps_per_snap && !run.final_state.individuals.empty(); ++s) {
      lookdown_step(run.final_state, model, dt, rng);
    }
    run.final_state.time = initial.time + static_cast<double>(k) * snapshot_every;
    record(run.final_state);
  }
  return run;
}

}  // namespace popdyn
