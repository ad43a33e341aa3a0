#include "popdyn/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <fmt/format.h>

#include "popdyn/io.hpp"
#include "popdyn/lineage.hpp"
#include "popdyn/lookdown.hpp"
#include "popdyn/pde.hpp"
#include "popdyn/stability.hpp"

#ifndef POPDYN_VERSION
#define POPDYN_VERSION "0.0.0"
#endif

namespace popdyn {

std::string toolkit_version() { return POPDYN_VERSION; }

namespace {

namespace fs = std::filesystem;

struct Sink {
  fs::path dir;
  std::vector<std::string> files;

  void csv(const std::string& name, const Table& t) {
    write_csv(dir / name, t);
    files.push_back(name);
  }
  void plot(const std::string& csv_name, const std::string& name, const PlotStyle& style) {
    emit_plot(dir / csv_name, dir / name, style);
    files.push_back(name);
  }
  void json(const std::string& name, const nlohmann::json& j) {
    write_text(dir / name, j.dump(2) + "\n");
    files.push_back(name);
  }
};

Grid1D domain_grid(const ExperimentConfig& cfg) {
  return Grid1D::covering(cfg.params.domain_lo, cfg.params.domain_hi, cfg.run.grid_h);
}

Box domain_box(const ExperimentConfig& cfg) {
  return Box::cube(cfg.params.dim, cfg.params.domain_lo, cfg.params.domain_hi);
}

/// x column followed by one column per snapshot.
Table profile_table(const Grid1D& grid, const std::vector<ScalarField1D>& fields) {
  Table t;
  t.columns.push_back("x");
  for (const auto& f : fields) t.columns.push_back(fmt::format("t={:g}", f.t));
  for (std::size_t i = 0; i < grid.n; ++i) {
    std::vector<double> row{grid.x(i)};
    for (const auto& f : fields) row.push_back(f.values[i]);
    t.rows.push_back(std::move(row));
  }
  return t;
}

/// At most `keep` evenly spaced members, always including the last.
template <class T>
std::vector<T> thin(const std::vector<T>& v, std::size_t keep) {
  if (v.size() <= keep) return v;
  std::vector<T> out;
  for (std::size_t k = 0; k < keep; ++k) out.push_back(v[k * (v.size() - 1) / (keep - 1)]);
  return out;
}

Kernel profile_kernel(const ExperimentConfig& cfg) { return GaussianKernel{1, cfg.params.interaction_variance}; }

void run_ibm_experiment(const ExperimentConfig& cfg, Sink& out, nlohmann::json& summary) {
  const DemographyModel model = build_model(cfg);
  Rng rng = make_stream(cfg.seed, 0);
  const PointPopulation init = uniform_population(cfg.run.initial_count, cfg.params.N, domain_box(cfg), rng);
  IbmRunOptions opts{cfg.run.horizon, cfg.run.snapshot_every,
                     cfg.run.stepper == "exact" ? Stepper::exact : Stepper::discrete, cfg.run.dt};
  const IbmTrajectory traj = run_ibm(model, init, opts, rng);
  Table mass{{"t", "mass", "count"}, {}};
  for (const auto& s : traj.snapshots) {
    mass.add_row({s.time, s.total_mass(), static_cast<double>(s.size())});
  }
  out.csv("mass.csv", mass);
  out.plot("mass.csv", "mass.svg", {"total mass", "t", {"mass"}, "t", "<1, eta_t>", false, false});
  if (cfg.params.dim == 1) {
    const Grid1D grid = domain_grid(cfg);
    std::vector<ScalarField1D> fields;
    for (const auto& s : thin(traj.snapshots, 8)) {
      auto f = density_profile(s, grid, profile_kernel(cfg));
      f.t = s.time;
      fields.push_back(std::move(f));
    }
    out.csv("density.csv", profile_table(grid, fields));
    out.plot("density.csv", "density.svg", {"smoothed density", "x", {}, "x", "rho * eta", false, false});
  }
  summary["extinct"] = traj.extinct;
  summary["final_mass"] = traj.snapshots.back().total_mass();
  summary["final_count"] = traj.snapshots.back().size();
}

void run_lookdown_experiment(const ExperimentConfig& cfg, Sink& out, nlohmann::json& summary) {
  const DemographyModel model = build_model(cfg);
  Rng rng = make_stream(cfg.seed, 0);
  const PointPopulation init = uniform_population(cfg.run.initial_count, cfg.params.N, domain_box(cfg), rng);
  const double dt = cfg.run.dt > 0.0 ? cfg.run.dt : max_stable_dt(model);
  const LookdownRun run = run_lookdown(model, init, cfg.run.horizon, cfg.run.snapshot_every, dt, rng);
  Table mass{{"t", "mass", "count", "ks_statistic", "ks_p"}, {}};
  for (std::size_t k = 0; k < run.snapshots.size(); ++k) {
    const auto& s = run.snapshots[k];
    const KsResult ks = k < run.level_ks.size() ? run.level_ks[k] : KsResult{NAN, NAN};
    mass.add_row({s.time, s.total_mass(), static_cast<double>(s.size()), ks.statistic, ks.p_value});
  }
  out.csv("mass.csv", mass);
  out.plot("mass.csv", "mass.svg", {"projected total mass", "t", {"mass"}, "t", "<1, eta_t>", false, false});
  out.csv("levels_ks.csv", table_from_columns({"t", "ks_p"}, {mass.column("t"), mass.column("ks_p")}));
  if (cfg.params.dim == 1) {
    const Grid1D grid = domain_grid(cfg);
    std::vector<ScalarField1D> fields;
    for (const auto& s : thin(run.snapshots, 8)) {
      auto f = density_profile(s, grid, profile_kernel(cfg));
      f.t = s.time;
      fields.push_back(std::move(f));
    }
    out.csv("density.csv", profile_table(grid, fields));
    out.plot("density.csv", "density.svg", {"projected density", "x", {}, "x", "rho * eta", false, false});
  }
  summary["final_mass"] = run.snapshots.back().total_mass();
  summary["log_records"] = run.final_state.log.size();
}

PdeProblem pde_for_preset(const ExperimentConfig& cfg) {
  PdeProblem p;
  p.diffusion = cfg.params.diffusion;
  const double s = cfg.params.s;
  if (cfg.preset == "logistic" || cfg.preset == "fkpp") {
    p.reaction = [](double m) { return 1.0 - m; };
  } else if (cfg.preset == "allen_cahn") {
    p.reaction = [s](double m) { return (1.0 - m) * (2.0 * m - 1.0 + s); };
  } else if (cfg.preset == "critical") {
    p.reaction = [](double) { return 0.0; };
  } else if (cfg.preset == "pme") {
    p.kind = PdeKind::pme_logistic;
  } else {
    throw ConfigError({"solve-pde: no local PDE for preset '" + cfg.preset + "'"});
  }
  return p;
}

ScalarField1D step_initial(const Grid1D& grid, double edge) {
  ScalarField1D f;
  f.grid = grid;
  f.values.resize(grid.n);
  for (std::size_t i = 0; i < grid.n; ++i) f.values[i] = grid.x(i) <= edge ? 1.0 : 0.0;
  return f;
}

void run_pde_experiment(const ExperimentConfig& cfg, Sink& out, nlohmann::json& summary) {
  const PdeProblem problem = pde_for_preset(cfg);
  const Grid1D grid = domain_grid(cfg);
  const double L = cfg.params.domain_hi - cfg.params.domain_lo;
  const ScalarField1D init = step_initial(grid, cfg.params.domain_lo + 0.1 * L);
  const PdeTrajectory traj = solve(problem, init, {cfg.run.horizon, cfg.run.dt, cfg.run.snapshot_every});
  out.csv("profile.csv", profile_table(grid, thin(traj.snapshots, 8)));
  out.plot("profile.csv", "profile.svg", {"solution profiles", "x", {}, "x", "phi", false, false});
  Table front{{"t", "front"}, {}};
  for (const auto& f : traj.snapshots) {
    try {
      front.add_row({f.t, front_position(f, 0.5)});
    } catch (const std::runtime_error&) {
    }
  }
  if (!front.rows.empty()) {
    out.csv("front.csv", front);
    out.plot("front.csv", "front.svg", {"front position", "t", {"front"}, "t", "x", false, false});
  }
  if (traj.snapshots.size() >= 10 && front.rows.size() == traj.snapshots.size()) {
    summary["speed"] = measure_wave_speed(traj.snapshots).speed;
  }
  summary["steps"] = traj.steps;
  summary["clipped_mass"] = traj.clipped_mass;
}

void run_lineage_experiment(const ExperimentConfig& cfg, Sink& out, nlohmann::json& summary) {
  WaveCase wave;
  double anchor = 0.0;
  if (cfg.preset == "allen_cahn") {
    wave = allen_cahn_wave(cfg.params.s);
  } else if (cfg.preset == "pme") {
    wave = pme_wave();
    anchor = -1.0;
  } else if (cfg.preset == "fkpp") {
    wave = fkpp_wave();
  } else {
    throw ConfigError({"lineage: preset must be allen_cahn, pme or fkpp, got '" + cfg.preset + "'"});
  }
  const DiffusionSpec1D spec = wavefront_spec(wave);
  const double h = std::min(cfg.run.grid_h, 0.01);
  std::optional<SpeedMeasure> sm;
  try {
    sm = speed_measure_density(spec, h, anchor);
  } catch (const std::runtime_error& e) {
    summary["stationary"] = e.what();
  }
  if (sm) {
    std::vector<double> xs;
    for (std::size_t i = 0; i < sm->grid.n; ++i) xs.push_back(sm->grid.x(i));
    out.csv("stationary.csv", table_from_columns({"xi", "density"}, {xs, sm->density}));
    summary["stationary"] = "speed measure";
  }
  const std::vector<double> occ = sde_occupation(spec, anchor, cfg.run.horizon, std::min(cfg.run.burn_in, 0.5 * cfg.run.horizon),
                                                 1.0, cfg.run.paths, cfg.seed, cfg.run.sde_dt, cfg.threads);
  // Histogram on 200 bins over the spec domain.
  const std::size_t bins = 200;
  const double width = (spec.hi - spec.lo) / static_cast<double>(bins);
  std::vector<double> centres(bins), hist(bins, 0.0), stationary(bins, NAN);
  for (std::size_t b = 0; b < bins; ++b) centres[b] = spec.lo + (static_cast<double>(b) + 0.5) * width;
  for (double x : occ) {
    const auto b = std::min<std::size_t>(bins - 1, static_cast<std::size_t>(std::max(0.0, (x - spec.lo) / width)));
    hist[b] += 1.0;
  }
  for (double& v : hist) v /= static_cast<double>(occ.size()) * width;
  out.csv("occupation.csv", table_from_columns({"xi", "density"}, {centres, hist}));
  Table overlay;
  if (sm) {
    for (std::size_t b = 0; b < bins; ++b) {
      const double u = (centres[b] - sm->grid.x0) / sm->grid.h;
      const auto i = std::min<std::size_t>(sm->grid.n - 2, static_cast<std::size_t>(std::max(0.0, u)));
      const double f = std::clamp(u - static_cast<double>(i), 0.0, 1.0);
      stationary[b] = (1.0 - f) * sm->density[i] + f * sm->density[i + 1];
    }
    overlay = table_from_columns({"xi", "occupation", "stationary"}, {centres, hist, stationary});
    summary["w1"] = wasserstein1(occ, sm->grid, sm->density);
  } else {
    overlay = table_from_columns({"xi", "occupation"}, {centres, hist});
  }
  out.csv("overlay.csv", overlay);
  out.plot("overlay.csv", "overlay.svg",
           {"lineage position relative to the front", "xi", {}, "xi", "density", false, true});
  double mean = 0.0;
  for (double x : occ) mean += x;
  summary["mean_position"] = mean / static_cast<double>(occ.size());
}

void run_stability_experiment(const ExperimentConfig& cfg, Sink& out, nlohmann::json& summary) {
  const DemographyModel model = build_model(cfg);
  const Point origin = Point::Zero(model.dispersal.dim());
  const double sigma2 = 0.5 * model.dispersal.max_eigenvalue(origin);
  const bool clumping = cfg.preset == "clumping";
  const HomogeneousEquilibrium eq =
      equilibrium_from_model(model, sigma2, clumping ? 1.0 : 0.6, clumping ? 20.0 : 1.4);
  const double eps = std::sqrt(clumping ? 9.0 : cfg.params.interaction_variance);
  const double u_max = 10.0 / eps;
  const double du = u_max / 4000.0;
  std::vector<double> us, ls;
  for (std::size_t k = 0; k <= 4000; ++k) {
    us.push_back(static_cast<double>(k) * du);
    ls.push_back(growth_rate(eq, us.back()));
  }
  out.csv("lambda.csv", table_from_columns({"u", "lambda"}, {us, ls}));
  out.plot("lambda.csv", "lambda.svg", {"linear growth rate", "u", {"lambda"}, "u", "lambda(u)", true, false});
  const BandReport rep = unstable_band(eq, u_max, du);
  nlohmann::json bands = nlohmann::json::array();
  for (const auto& [a, b] : rep.bands) bands.push_back({a, b});
  nlohmann::json report{{"stable", rep.stable}, {"bands", bands}, {"wavelength", nullptr}, {"phi0", eq.phi0}};
  if (auto c = clump_wavelength(eq, u_max, du)) report["wavelength"] = c->wavelength;
  out.json("bands.json", report);
  summary = report;
}

void run_sweep_experiment(const ExperimentConfig& cfg, Sink& out, nlohmann::json& summary) {
  PdeProblem p = pde_for_preset(cfg);
  const Grid1D grid = domain_grid(cfg);
  const double mid = 0.5 * (cfg.params.domain_lo + cfg.params.domain_hi);
  ScalarField1D init;
  init.grid = grid;
  for (std::size_t i = 0; i < grid.n; ++i) init.values.push_back(0.5 + 0.4 * std::exp(-std::pow(grid.x(i) - mid, 2)));
  const PdeRunOptions opts{cfg.run.horizon, cfg.run.dt, cfg.run.horizon};
  EpsilonSweep sweep;
  if (p.kind == PdeKind::pme_logistic) {
    p.kind = PdeKind::nonlocal_pme;
    std::vector<std::function<double(double)>> tests;
    for (double c : {-1.0, 0.0, 1.0}) tests.push_back([c, mid](double x) { return std::exp(-std::pow(x - mid - c, 2)); });
    sweep = sweep_nonlocal_pme(p, init, opts, cfg.run.epsilons, tests);
  } else {
    p.kind = PdeKind::nonlocal_rd;
    sweep = sweep_nonlocal_rd(p, init, opts, cfg.run.epsilons);
  }
  out.csv("sweep.csv", table_from_columns({"epsilon", "error"}, {sweep.epsilons, sweep.errors}));
  out.plot("sweep.csv", "sweep.svg", {"distance to the local solution", "epsilon", {"error"}, "epsilon", "error", false, false});
  summary["strictly_decreasing"] = sweep.strictly_decreasing();
  summary["errors"] = sweep.errors;
}

void run_identifiability_experiment(const ExperimentConfig& cfg, Sink& out, nlohmann::json& summary) {
  const double lam = cfg.run.lambda;
  IdentifiabilityOptions opts;
  opts.paths = cfg.run.paths;
  opts.seed = cfg.seed;
  const auto rep = identifiability_demo([lam](double) { return lam; }, opts);
  summary = {{"lambda", lam},
             {"residual_defect", rep.residual_defect},
             {"exit_time_base", rep.exit_time_base},
             {"exit_time_scaled", rep.exit_time_scaled},
             {"ratio", rep.ratio},
             {"predicted_ratio", rep.predicted_ratio}};
  out.json("report.json", summary);
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  Sink sink{cfg.output, {}};
  fs::create_directories(sink.dir);
  nlohmann::json summary = nlohmann::json::object();
  const std::string name = to_string(cfg.kind);
  try {
    switch (cfg.kind) {
      case ExperimentKind::ibm:
        run_ibm_experiment(cfg, sink, summary);
        break;
      case ExperimentKind::lookdown:
        run_lookdown_experiment(cfg, sink, summary);
        break;
      case ExperimentKind::pde:
        run_pde_experiment(cfg, sink, summary);
        break;
      case ExperimentKind::lineage:
        run_lineage_experiment(cfg, sink, summary);
        break;
      case ExperimentKind::stability:
        run_stability_experiment(cfg, sink, summary);
        break;
      case ExperimentKind::convergence_sweep:
        run_sweep_experiment(cfg, sink, summary);
        break;
      case ExperimentKind::identifiability:
        run_identifiability_experiment(cfg, sink, summary);
        break;
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw std::runtime_error(name + ": " + e.what());
  }
  nlohmann::json manifest{{"toolkit", "popdyn"},
                          {"version", toolkit_version()},
                          {"config", to_json(cfg)},
                          {"files", sink.files},
                          {"summary", summary}};
  sink.json("manifest.json", manifest);
  return {sink.dir, sink.files, summary};
}

}  // namespace popdyn
