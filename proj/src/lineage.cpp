#include "popdyn/lineage.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <memory>
#include <numeric>
#include <stdexcept>
#include <thread>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/numeric/odeint.hpp>

#include "popdyn/ibm.hpp"
#include "popdyn/pde.hpp"

namespace popdyn {

LineageCoefficients lineage_coefficients(double r, double gamma, double sigma2, double b, double phi,
                                         double grad_log_gamma_phi) {
  if (!(phi > 0.0)) throw std::domain_error("lineage undefined where density vanishes");
  const double speed = r * gamma;
  return {speed * sigma2, speed * (2.0 * sigma2 * grad_log_gamma_phi - b)};
}

// --- wave profiles ----------------------------------------------------------

namespace {

/// Tabulated FKPP profile for c = 2 in the variables (log w, w'/w).
struct FkppTable {
  double x0 = 0.0;
  double h = 1e-3;
  std::vector<double> logw;
  std::vector<double> z;
  double lambda = std::sqrt(2.0) - 1.0;  // w ~ 1 - delta e^{lambda xi} on the left

  double log_w(double xi) const {
    const double u = (xi - x0) / h;
    if (u <= 0.0) {
      const double delta = -std::expm1(logw.front()) * std::exp(lambda * (xi - x0));
      return std::log1p(-delta);
    }
    const double end = static_cast<double>(logw.size() - 1);
    if (u >= end) {
      const double d = xi - (x0 + end * h);
      const double k = tail_k();
      if (!std::isfinite(k)) return logw.back() - d;
      return logw.back() - d + std::log((d + k) / k);
    }
    const auto i = static_cast<std::size_t>(u);
    const double f = u - static_cast<double>(i);
    return (1.0 - f) * logw[i] + f * logw[i + 1];
  }

  double slope(double xi) const {
    const double u = (xi - x0) / h;
    if (u <= 0.0) {
      const double w = std::exp(log_w(xi));
      return -lambda * (1.0 - w) / w;
    }
    const double end = static_cast<double>(z.size() - 1);
    if (u >= end) {
      const double k = tail_k();
      if (!std::isfinite(k)) return -1.0;
      return -1.0 + 1.0 / (xi - (x0 + end * h) + k);
    }
    const auto i = static_cast<std::size_t>(u);
    const double f = u - static_cast<double>(i);
    return (1.0 - f) * z[i] + f * z[i + 1];
  }

  double tail_k() const {
    const double e = z.back() + 1.0;
    return e > 0.0 ? 1.0 / e : std::numeric_limits<double>::infinity();
  }
};

std::shared_ptr<const FkppTable> fkpp_table() {
  static const std::shared_ptr<const FkppTable> table = [] {
    auto t = std::make_shared<FkppTable>();
    using State = std::array<double, 2>;
    const double delta = 1e-8;
    State s{std::log1p(-delta), -t->lambda * delta / (1.0 - delta)};
    // w'' + 2 w' + w (1 - w) = 0 rewritten for l = log w, z = w'/w.
    auto rhs = [](const State& y, State& dy, double) {
      dy[0] = y[1];
      dy[1] = -y[1] * y[1] - 2.0 * y[1] - (1.0 - std::exp(y[0]));
    };
    boost::numeric::odeint::runge_kutta4<State> stepper;
    std::vector<double> xs;
    double x = 0.0;
    while (true) {
      t->logw.push_back(s[0]);
      t->z.push_back(s[1]);
      xs.push_back(x);
      if (s[0] < -80.0 || x > 400.0) break;
      stepper.do_step(rhs, s, x, t->h);
      x += t->h;
      if (!std::isfinite(s[1]) || s[1] < -1.0) break;
    }
    // Shift so that w(0) = 1/2.
    const double half = std::log(0.5);
    std::size_t i = 0;
    while (i + 1 < t->logw.size() && t->logw[i + 1] > half) ++i;
    const double f = (t->logw[i] - half) / (t->logw[i] - t->logw[i + 1]);
    t->x0 = -(xs[i] + f * t->h);
    return std::shared_ptr<const FkppTable>(t);
  }();
  return table;
}

double pme_w(double xi) { return xi < 0.0 ? -std::expm1(0.5 * xi) : 0.0; }

double pme_log_slope(double xi) {
  const double e = std::exp(0.5 * xi);
  return -0.5 * e / -std::expm1(0.5 * xi);
}

}  // namespace

WaveCase fkpp_wave(double lo, double hi) {
  auto table = fkpp_table();
  WaveCase wc;
  wc.kind = WaveCaseKind::fkpp;
  wc.speed = 2.0;
  wc.w = [table](double xi) { return std::exp(table->log_w(xi)); };
  wc.log_slope = [table](double xi) { return table->slope(xi); };
  wc.lo = lo;
  wc.hi = hi;
  return wc;
}

WaveCase allen_cahn_wave(double s, double lo, double hi) {
  WaveCase wc;
  wc.kind = WaveCaseKind::allen_cahn;
  wc.s = s;
  wc.speed = s;
  wc.w = [](double xi) { return analytic_wave_value(WaveKind::allen_cahn, xi, 0.0, 0.0, 0.0); };
  wc.log_slope = [](double xi) { return -(1.0 - analytic_wave_value(WaveKind::allen_cahn, xi, 0.0, 0.0, 0.0)); };
  wc.lo = lo;
  wc.hi = hi;
  return wc;
}

WaveCase pme_wave(double lo) {
  WaveCase wc;
  wc.kind = WaveCaseKind::pme;
  wc.speed = 1.0;
  wc.w = pme_w;
  wc.log_slope = pme_log_slope;
  wc.lo = lo;
  wc.hi = 0.0;
  return wc;
}

WaveCase pme_drifted_wave(double lo) {
  WaveCase wc = pme_wave(lo);
  wc.kind = WaveCaseKind::pme_drifted;
  wc.speed = 0.5;
  return wc;
}

WaveCase wave_case(WaveCaseKind kind, double s) {
  switch (kind) {
    case WaveCaseKind::fkpp:
      return fkpp_wave();
    case WaveCaseKind::allen_cahn:
      return allen_cahn_wave(s);
    case WaveCaseKind::pme:
      return pme_wave();
    case WaveCaseKind::pme_drifted:
      return pme_drifted_wave();
  }
  throw std::invalid_argument("unknown wave case");
}

std::string to_string(WaveCaseKind kind) {
  switch (kind) {
    case WaveCaseKind::fkpp:
      return "fkpp";
    case WaveCaseKind::allen_cahn:
      return "allen_cahn";
    case WaveCaseKind::pme:
      return "pme";
    case WaveCaseKind::pme_drifted:
      return "pme_drifted";
  }
  return "?";
}

DiffusionSpec1D wavefront_spec(const WaveCase& wave) {
  DiffusionSpec1D spec;
  spec.lo = wave.lo;
  spec.hi = wave.hi;
  spec.lo_open = true;
  const auto w = wave.w;
  const auto z = wave.log_slope;
  switch (wave.kind) {
    case WaveCaseKind::fkpp:
    case WaveCaseKind::allen_cahn: {
      // r = gamma = 1, sigma^2 = 1, b = 0, plus the frame speed.
      spec.hi_open = true;
      const double c = wave.speed;
      spec.a = [w](double xi) { return lineage_coefficients(1.0, 1.0, 1.0, 0.0, w(xi), 0.0).a; };
      spec.drift = [w, z, c](double xi) {
        return lineage_coefficients(1.0, 1.0, 1.0, 0.0, w(xi), z(xi)).drift + c;
      };
      break;
    }
    case WaveCaseKind::pme: {
      // gamma(m) = m, so log(gamma w) = 2 log w.
      spec.hi_open = false;
      const double c = wave.speed;
      spec.a = [w](double xi) { return xi < 0.0 ? lineage_coefficients(1.0, w(xi), 1.0, 0.0, w(xi), 0.0).a : 0.0; };
      spec.drift = [w, z, c](double xi) {
        if (!(xi < 0.0)) return c;
        return lineage_coefficients(1.0, w(xi), 1.0, 0.0, w(xi), 2.0 * z(xi)).drift + c;
      };
      break;
    }
    case WaveCaseKind::pme_drifted: {
      // Reversible form with mean displacement b = grad h, h(xi) = -3 xi / 2.
      spec.hi_open = false;
      spec.a = [w](double xi) { return xi < 0.0 ? w(xi) : 0.0; };
      spec.drift = [w, z](double xi) {
        if (!(xi < 0.0)) return 0.0;
        return lineage_coefficients(1.0, w(xi), 1.0, -1.5, w(xi), 2.0 * z(xi)).drift;
      };
      break;
    }
  }
  return spec;
}

// --- speed measure ----------------------------------------------------------

namespace {

double integrate_ratio(const DiffusionSpec1D& spec, double x0, double x1) {
  if (x0 == x1) return 0.0;
  auto f = [&spec](double x) { return spec.drift(x) / spec.a(x); };
  return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, x0, x1, 4, 1e-12);
}

/// Cumulative exponent int_anchor^{x_i} drift/a at every node; NaN where a vanishes.
std::vector<double> exponent_at_nodes(const DiffusionSpec1D& spec, const Grid1D& grid, double anchor) {
  std::vector<double> out(grid.n, std::numeric_limits<double>::quiet_NaN());
  std::vector<char> live(grid.n);
  for (std::size_t i = 0; i < grid.n; ++i) live[i] = spec.a(grid.x(i)) > 0.0;
  // Nearest live node to the anchor.
  std::size_t j = 0;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < grid.n; ++i) {
    if (live[i] && std::abs(grid.x(i) - anchor) < best) {
      best = std::abs(grid.x(i) - anchor);
      j = i;
    }
  }
  if (!std::isfinite(best)) throw std::invalid_argument("diffusion coefficient vanishes on the whole grid");
  out[j] = integrate_ratio(spec, anchor, grid.x(j));
  for (std::size_t i = j + 1; i < grid.n && live[i]; ++i) {
    out[i] = out[i - 1] + integrate_ratio(spec, grid.x(i - 1), grid.x(i));
  }
  for (std::size_t i = j; i-- > 0 && live[i];) {
    out[i] = out[i + 1] - integrate_ratio(spec, grid.x(i), grid.x(i + 1));
  }
  return out;
}

double trapezoid(const std::vector<double>& v, double h) {
  if (v.size() < 2) return 0.0;
  double s = 0.5 * (v.front() + v.back());
  for (std::size_t i = 1; i + 1 < v.size(); ++i) s += v[i];
  return s * h;
}

std::vector<double> unnormalized_measure(const DiffusionSpec1D& spec, const Grid1D& grid, double anchor) {
  const auto expo = exponent_at_nodes(spec, grid, anchor);
  std::vector<double> m(grid.n, 0.0);
  for (std::size_t i = 0; i < grid.n; ++i) {
    if (std::isnan(expo[i])) continue;
    m[i] = std::exp(expo[i]) / spec.a(grid.x(i));
  }
  return m;
}

}  // namespace

SpeedMeasure speed_measure_density(const DiffusionSpec1D& spec, const Grid1D& grid, double anchor,
                                   bool check_integrable) {
  if (grid.n < 2) throw std::invalid_argument("speed measure needs at least two nodes");
  SpeedMeasure out;
  out.grid = grid;
  out.unnormalized = unnormalized_measure(spec, grid, anchor);
  out.mass = trapezoid(out.unnormalized, grid.h);
  if (!(out.mass > 0.0) || !std::isfinite(out.mass)) throw std::runtime_error("no stationary distribution");
  if (check_integrable && (spec.lo_open || spec.hi_open)) {
    const double length = grid.back() - grid.x0;
    const double extra = spec.lo_open && spec.hi_open ? 0.5 * length : length;
    const double lo = spec.lo_open ? grid.x0 - extra : grid.x0;
    const double hi = spec.hi_open ? grid.back() + extra : grid.back();
    const Grid1D wide = Grid1D::covering(lo, hi, grid.h);
    const double wide_mass = trapezoid(unnormalized_measure(spec, wide, anchor), wide.h);
    if (!(wide_mass <= 1.5 * out.mass)) throw std::runtime_error("no stationary distribution");
  }
  out.density = out.unnormalized;
  for (double& v : out.density) v /= out.mass;
  return out;
}

SpeedMeasure speed_measure_density(const DiffusionSpec1D& spec, double h, double anchor, bool check_integrable) {
  return speed_measure_density(spec, Grid1D::covering(spec.lo, spec.hi, h), anchor, check_integrable);
}

// --- SDE --------------------------------------------------------------------

SdePath simulate_lineage_sde(const DiffusionSpec1D& spec, double x0, double horizon, Rng& rng,
                             const SdeOptions& opts) {
  if (!(opts.dt > 0.0)) throw std::invalid_argument("dt must be positive");
  const double every = opts.record_every > 0.0 ? opts.record_every : opts.dt;
  const auto steps = static_cast<std::size_t>(std::llround(horizon / opts.dt));
  const auto stride = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(every / opts.dt)));
  std::normal_distribution<double> gauss;
  SdePath path;
  double x = x0;
  path.t.push_back(0.0);
  path.x.push_back(x);
  for (std::size_t k = 1; k <= steps; ++k) {
    const double mean = x + spec.drift(x) * opts.dt;
    const double sd = std::sqrt(2.0 * std::max(spec.a(x), 0.0) * opts.dt);
    int tries = 0;
    double y = mean + sd * gauss(rng);
    while (!(y > spec.lo && y < spec.hi)) {
      if (++tries >= opts.max_rejections) throw std::runtime_error("guard-band exhaustion");
      y = mean + sd * gauss(rng);
    }
    x = y;
    if (k % stride == 0) {
      path.t.push_back(static_cast<double>(k) * opts.dt);
      path.x.push_back(x);
    }
  }
  return path;
}

std::vector<double> sde_occupation(const DiffusionSpec1D& spec, double x0, double horizon, double burn_in,
                                   double record_every, std::size_t paths, std::uint64_t seed, double dt,
                                   int threads) {
  std::vector<std::vector<double>> per_path(paths);
  auto work = [&](std::size_t begin, std::size_t stride) {
    for (std::size_t p = begin; p < paths; p += stride) {
      Rng rng = make_stream(seed, p);
      const SdePath path = simulate_lineage_sde(spec, x0, horizon, rng, {dt, record_every, 1000});
      for (std::size_t k = 0; k < path.t.size(); ++k) {
        if (path.t[k] >= burn_in - 1e-9) per_path[p].push_back(path.x[k]);
      }
    }
  };
  const auto n = static_cast<std::size_t>(std::max(1, threads));
  if (n == 1) {
    work(0, 1);
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t k = 0; k < n; ++k) pool.emplace_back(work, k, n);
  }
  std::vector<double> out;
  for (const auto& v : per_path) out.insert(out.end(), v.begin(), v.end());
  return out;
}

double wasserstein1(std::vector<double> sample, const Grid1D& grid, const std::vector<double>& density) {
  if (sample.empty()) throw std::invalid_argument("empty sample");
  if (density.size() != grid.n) throw std::invalid_argument("grid mismatch");
  std::sort(sample.begin(), sample.end());
  std::vector<double> cdf(grid.n, 0.0);
  for (std::size_t i = 1; i < grid.n; ++i) cdf[i] = cdf[i - 1] + 0.5 * grid.h * (density[i - 1] + density[i]);
  const double total = cdf.back();
  const double n = static_cast<double>(sample.size());
  std::vector<double> gap(grid.n);
  for (std::size_t i = 0; i < grid.n; ++i) {
    const auto below = std::upper_bound(sample.begin(), sample.end(), grid.x(i)) - sample.begin();
    const double emp = i + 1 == grid.n ? 1.0 : static_cast<double>(below) / n;
    gap[i] = std::abs(emp - cdf[i] / total);
  }
  return trapezoid(gap, grid.h);
}

double wasserstein1(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  std::vector<double> pts(a);
  pts.insert(pts.end(), b.begin(), b.end());
  std::sort(pts.begin(), pts.end());
  double w = 0.0;
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    const double fa = static_cast<double>(std::upper_bound(a.begin(), a.end(), pts[i]) - a.begin()) / na;
    const double fb = static_cast<double>(std::upper_bound(b.begin(), b.end(), pts[i]) - b.begin()) / nb;
    w += std::abs(fa - fb) * (pts[i + 1] - pts[i]);
  }
  return w;
}

// --- reversibility ----------------------------------------------------------

double reversible_measure(double gamma, double r, double phi, double h, double sigma2) {
  return gamma / r * phi * phi * std::exp(-h / sigma2);
}

namespace {

std::vector<double> normalised(std::vector<double> v, double h) {
  const double mass = trapezoid(v, h);
  for (double& x : v) x /= mass;
  return v;
}

}  // namespace

std::vector<double> drifted_pme_stationary(const Grid1D& grid) {
  std::vector<double> v(grid.n);
  for (std::size_t i = 0; i < grid.n; ++i) {
    const double xi = grid.x(i);
    v[i] = xi < 0.0 ? std::exp(1.5 * xi) * std::pow(-std::expm1(0.5 * xi), 3) : 0.0;
  }
  return normalised(std::move(v), grid.h);
}

std::vector<double> drifted_pme_from_potential(const Grid1D& grid) {
  std::vector<double> v(grid.n);
  for (std::size_t i = 0; i < grid.n; ++i) {
    const double xi = grid.x(i);
    const double w = pme_w(xi);
    v[i] = xi < 0.0 ? reversible_measure(w, 1.0, w, -1.5 * xi, 1.0) : 0.0;
  }
  return normalised(std::move(v), grid.h);
}

ChainGenerator reversible_chain(const DiffusionSpec1D& spec, const Grid1D& grid, double anchor) {
  ChainGenerator q;
  q.grid = grid;
  q.up.assign(grid.n, 0.0);
  q.down.assign(grid.n, 0.0);
  const auto expo = exponent_at_nodes(spec, grid, anchor);
  std::vector<double> m(grid.n);
  for (std::size_t i = 0; i < grid.n; ++i) {
    if (std::isnan(expo[i])) throw std::invalid_argument("diffusion coefficient vanishes on the chain grid");
    m[i] = std::exp(expo[i]) / spec.a(grid.x(i));
  }
  const double h2 = grid.h * grid.h;
  for (std::size_t i = 0; i + 1 < grid.n; ++i) {
    const double mid = grid.x(i) + 0.5 * grid.h;
    const double s_mid = std::exp(expo[i] + integrate_ratio(spec, grid.x(i), mid));
    q.up[i] = s_mid / (m[i] * h2);
    q.down[i + 1] = s_mid / (m[i + 1] * h2);
  }
  return q;
}

double detailed_balance_defect(const ChainGenerator& q, const std::vector<double>& pi) {
  if (pi.size() != q.grid.n) throw std::invalid_argument("grid mismatch");
  double worst = 0.0, scale = 0.0;
  for (std::size_t i = 0; i + 1 < pi.size(); ++i) {
    const double f = pi[i] * q.up[i];
    const double b = pi[i + 1] * q.down[i + 1];
    worst = std::max(worst, std::abs(f - b));
    scale = std::max(scale, std::abs(f));
  }
  return scale > 0.0 ? worst / scale : 0.0;
}

// --- lookdown lineages ------------------------------------------------------

FrontTrack::FrontTrack(std::vector<double> times, std::vector<double> fronts)
    : times_(std::move(times)), fronts_(std::move(fronts)) {
  if (times_.empty() || times_.size() != fronts_.size()) throw std::invalid_argument("front not detected");
}

double FrontTrack::at(double t) const {
  const double tol = 1e-9;
  if (t < times_.front() - tol || t > times_.back() + tol) throw std::out_of_range("front not detected");
  if (times_.size() == 1 || t <= times_.front()) return fronts_.front();
  if (t >= times_.back()) return fronts_.back();
  const auto it = std::upper_bound(times_.begin(), times_.end(), t);
  const auto k = static_cast<std::size_t>(it - times_.begin());
  const double f = (t - times_[k - 1]) / (times_[k] - times_[k - 1]);
  return (1.0 - f) * fronts_[k - 1] + f * fronts_[k];
}

FrontTrack track_front(const std::vector<PointPopulation>& snapshots, const Grid1D& grid, const Kernel& kernel,
                       double level) {
  std::vector<double> times, fronts;
  for (const auto& snap : snapshots) {
    if (snap.empty()) throw std::runtime_error("front not detected");
    times.push_back(snap.time);
    fronts.push_back(front_position(density_profile(snap, grid, kernel), level));
  }
  return {std::move(times), std::move(fronts)};
}

double LineageOccupation::mean_at(std::size_t k) const {
  const auto& v = relative.at(k);
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

std::vector<double> LineageOccupation::pooled(double s_min) const {
  std::vector<double> out;
  for (std::size_t k = 0; k < backward_times.size(); ++k) {
    if (backward_times[k] >= s_min - 1e-9) out.insert(out.end(), relative[k].begin(), relative[k].end());
  }
  return out;
}

LineageOccupation empirical_lineage_occupation(const LevelledPopulation& state, const FrontTrack& front,
                                               double depth, double ds, std::size_t count, Rng& rng,
                                               double window) {
  const double cutoff = front.at(state.time) - window;
  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < state.individuals.size(); ++i) {
    if (state.individuals[i].position[0] >= cutoff) order.push_back(i);
  }
  if (order.empty()) throw std::runtime_error("no individuals to trace");
  std::shuffle(order.begin(), order.end(), rng);
  order.resize(std::min(count, order.size()));
  std::sort(order.begin(), order.end());

  LineageOccupation occ;
  const auto steps = static_cast<std::size_t>(std::floor(depth / ds + 1e-9));
  for (std::size_t k = 0; k <= steps; ++k) occ.backward_times.push_back(static_cast<double>(k) * ds);
  occ.relative.assign(occ.backward_times.size(), {});
  std::vector<double> fronts;
  for (double s : occ.backward_times) fronts.push_back(front.at(state.time - s));

  const LineageIndex index(state);
  for (std::size_t i : order) {
    const auto& ind = state.individuals[i];
    const LineagePath path = index.trace(ind.label, ind.position, state.time - depth);
    for (std::size_t k = 0; k < occ.backward_times.size(); ++k) {
      occ.relative[k].push_back(path.at(occ.backward_times[k])[0] - fronts[k]);
    }
  }
  occ.lineages = order.size();
  return occ;
}

// --- identifiability --------------------------------------------------------

double mean_exit_time(const DiffusionSpec1D& spec, double x0, double dt, std::size_t paths, std::uint64_t seed) {
  double total = 0.0;
  std::normal_distribution<double> gauss;
  for (std::size_t p = 0; p < paths; ++p) {
    Rng rng = make_stream(seed, p);
    double x = x0;
    std::size_t k = 0;
    while (x > spec.lo && x < spec.hi) {
      x += spec.drift(x) * dt + std::sqrt(2.0 * spec.a(x) * dt) * gauss(rng);
      ++k;
    }
    total += static_cast<double>(k) * dt;
  }
  return total / static_cast<double>(paths);
}

IdentifiabilityReport identifiability_demo(const std::function<double(double)>& lambda,
                                           const IdentifiabilityOptions& opts) {
  IdentifiabilityReport rep;
  // Standing Allen-Cahn profile, r = gamma = 1.
  const double s = 0.0;
  auto w = [](double x) { return analytic_wave_value(WaveKind::allen_cahn, x, 0.0, 0.0, 0.0); };
  auto F = [s](double m) { return (1.0 - m) * (2.0 * m - 1.0 + s); };
  const Grid1D grid = Grid1D::covering(-10.0, 10.0, 0.01);
  for (std::size_t i = 1; i + 1 < grid.n; ++i) {
    const double x = grid.x(i);
    const double lap = (w(x - grid.h) - 2.0 * w(x) + w(x + grid.h)) / (grid.h * grid.h);
    const double r = 1.0;
    const double base = r * lap + F(w(x)) * w(x);
    const double scaled = (lambda(x) * r) * lap + (lambda(x) * F(w(x))) * w(x);
    rep.residual_defect = std::max(rep.residual_defect, std::abs(scaled - lambda(x) * base));
  }

  const double L = opts.half_width;
  const double l0 = lambda(0.0);
  DiffusionSpec1D base{[](double) { return 1.0; }, [](double) { return 0.0; }, -L, L};
  DiffusionSpec1D scaled{[l0](double) { return l0; }, [](double) { return 0.0; }, -L, L};
  rep.exit_time_base = mean_exit_time(base, 0.0, opts.dt, opts.paths, opts.seed);
  rep.exit_time_scaled = mean_exit_time(scaled, 0.0, opts.dt, opts.paths, splitmix64(opts.seed));
  rep.ratio = rep.exit_time_scaled / rep.exit_time_base;
  rep.predicted_ratio = 1.0 / l0;
  return rep;
}

}  // namespace popdyn
