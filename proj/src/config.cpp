#include "popdyn/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include <fmt/format.h>

namespace popdyn {

namespace {

const std::vector<std::pair<ExperimentKind, std::string>>& kind_names() {
  static const std::vector<std::pair<ExperimentKind, std::string>> names{
      {ExperimentKind::ibm, "ibm"},
      {ExperimentKind::lookdown, "lookdown"},
      {ExperimentKind::pde, "pde"},
      {ExperimentKind::lineage, "lineage"},
      {ExperimentKind::stability, "stability"},
      {ExperimentKind::convergence_sweep, "convergence-sweep"},
      {ExperimentKind::identifiability, "identifiability"}};
  return names;
}

std::string join(const std::vector<std::string>& v) {
  std::string s;
  for (const auto& x : v) s += (s.empty() ? "" : ", ") + x;
  return s;
}

/// Collects diagnostics while reading typed members.
struct Reader {
  std::vector<std::string>& diag;

  void keys(const nlohmann::json& obj, const std::string& where, const std::set<std::string>& allowed) {
    if (!obj.is_object()) {
      diag.push_back(where + ": expected an object");
      return;
    }
    for (const auto& [k, v] : obj.items()) {
      if (!allowed.count(k)) {
        diag.push_back(fmt::format("{}: unknown key '{}'", where, k));
      }
    }
  }

  template <class T>
  void get(const nlohmann::json& obj, const std::string& key, const std::string& where, T& out) {
    if (!obj.is_object() || !obj.contains(key)) return;
    const auto& v = obj.at(key);
    try {
      if constexpr (std::is_same_v<T, double>) {
        if (!v.is_number()) throw std::invalid_argument("");
      } else if constexpr (std::is_integral_v<T> && !std::is_same_v<T, bool>) {
        if (!v.is_number_integer() || (std::is_unsigned_v<T> && v.get<long long>() < 0 && !v.is_number_unsigned())) {
          throw std::invalid_argument("");
        }
      } else if constexpr (std::is_same_v<T, std::string>) {
        if (!v.is_string()) throw std::invalid_argument("");
      }
      out = v.get<T>();
    } catch (const std::exception&) {
      diag.push_back(fmt::format("{}.{}: wrong type ({})", where, key, v.dump()));
    }
  }
};

}  // namespace

std::string to_string(ExperimentKind kind) {
  for (const auto& [k, n] : kind_names()) {
    if (k == kind) return n;
  }
  return "?";
}

std::optional<ExperimentKind> parse_experiment_kind(const std::string& name) {
  for (const auto& [k, n] : kind_names()) {
    if (n == name) return k;
  }
  return std::nullopt;
}

ConfigError::ConfigError(std::vector<std::string> diagnostics)
    : std::runtime_error("invalid config: " + join(diagnostics)), diagnostics_(std::move(diagnostics)) {}

ExperimentConfig parse_config(const nlohmann::json& input) {
  const nlohmann::json& j = input.is_object() && input.contains("config") && input.contains("version")
                                ? input.at("config")
                                : input;
  std::vector<std::string> diag;
  Reader rd{diag};
  ExperimentConfig cfg;
  rd.keys(j, "config", {"experiment", "preset", "seed", "output", "threads", "params", "run"});
  if (!j.is_object()) throw ConfigError(diag);

  if (j.contains("experiment")) {
    std::string name;
    rd.get(j, "experiment", "config", name);
    if (auto k = parse_experiment_kind(name)) {
      cfg.kind = *k;
    } else if (j.at("experiment").is_string()) {
      std::vector<std::string> valid;
      for (const auto& kn : kind_names()) valid.push_back(kn.second);
      diag.push_back(fmt::format("config.experiment: unknown experiment '{}' (valid: {})", name, join(valid)));
    }
  }
  rd.get(j, "preset", "config", cfg.preset);
  const auto& names = preset_names();
  if (std::find(names.begin(), names.end(), cfg.preset) == names.end()) {
    diag.push_back(fmt::format("config.preset: unknown preset '{}' (valid presets: {})", cfg.preset, join(names)));
  }
  rd.get(j, "seed", "config", cfg.seed);
  rd.get(j, "output", "config", cfg.output);
  rd.get(j, "threads", "config", cfg.threads);
  if (cfg.threads < 1) diag.push_back("config.threads: must be at least 1");

  if (j.contains("params")) {
    const auto& p = j.at("params");
    rd.keys(p, "params",
            {"N", "theta", "diffusion", "interaction_variance", "domain_lo", "domain_hi", "dim", "s", "gamma_cap",
             "density_ceiling", "r", "kernel_r_variance", "kernel_gamma_variance"});
    auto& q = cfg.params;
    rd.get(p, "N", "params", q.N);
    rd.get(p, "theta", "params", q.theta);
    rd.get(p, "diffusion", "params", q.diffusion);
    rd.get(p, "interaction_variance", "params", q.interaction_variance);
    rd.get(p, "domain_lo", "params", q.domain_lo);
    rd.get(p, "domain_hi", "params", q.domain_hi);
    rd.get(p, "dim", "params", q.dim);
    rd.get(p, "s", "params", q.s);
    rd.get(p, "gamma_cap", "params", q.gamma_cap);
    rd.get(p, "density_ceiling", "params", q.density_ceiling);
    rd.get(p, "r", "params", cfg.r);
    if (p.is_object() && p.contains("kernel_r_variance")) {
      double v = 0.0;
      rd.get(p, "kernel_r_variance", "params", v);
      cfg.kernel_r_variance = v;
    }
    if (p.is_object() && p.contains("kernel_gamma_variance")) {
      double v = 0.0;
      rd.get(p, "kernel_gamma_variance", "params", v);
      cfg.kernel_gamma_variance = v;
    }
    if (!(q.N > 0.0)) diag.push_back("params.N: must be positive");
    if (!(q.theta > 0.0)) diag.push_back("params.theta: must be positive");
    if (!(q.domain_hi > q.domain_lo)) diag.push_back("params: domain_hi must exceed domain_lo");
    if (q.dim < 1 || q.dim > 3) diag.push_back("params.dim: must be 1, 2 or 3");
    if (!(q.interaction_variance > 0.0)) diag.push_back("params.interaction_variance: must be positive");
  }

  if (j.contains("run")) {
    const auto& r = j.at("run");
    rd.keys(r, "run",
            {"horizon", "dt", "snapshot_every", "initial_count", "stepper", "grid_h", "paths", "sde_dt", "burn_in",
             "epsilons", "lambda"});
    auto& q = cfg.run;
    rd.get(r, "horizon", "run", q.horizon);
    rd.get(r, "dt", "run", q.dt);
    rd.get(r, "snapshot_every", "run", q.snapshot_every);
    rd.get(r, "initial_count", "run", q.initial_count);
    rd.get(r, "stepper", "run", q.stepper);
    rd.get(r, "grid_h", "run", q.grid_h);
    rd.get(r, "paths", "run", q.paths);
    rd.get(r, "sde_dt", "run", q.sde_dt);
    rd.get(r, "burn_in", "run", q.burn_in);
    rd.get(r, "lambda", "run", q.lambda);
    if (r.is_object() && r.contains("epsilons")) {
      const auto& e = r.at("epsilons");
      if (!e.is_array() || !std::all_of(e.begin(), e.end(), [](const auto& x) { return x.is_number(); })) {
        diag.push_back("run.epsilons: expected an array of numbers");
      } else {
        q.epsilons = e.get<std::vector<double>>();
      }
    }
    if (q.stepper != "exact" && q.stepper != "discrete") diag.push_back("run.stepper: must be 'exact' or 'discrete'");
    if (!(q.horizon > 0.0)) diag.push_back("run.horizon: must be positive");
    if (!(q.snapshot_every > 0.0)) diag.push_back("run.snapshot_every: must be positive");
    if (!(q.grid_h > 0.0)) diag.push_back("run.grid_h: must be positive");
    if (!(q.sde_dt > 0.0)) diag.push_back("run.sde_dt: must be positive");
    if (q.dt < 0.0) diag.push_back("run.dt: must be nonnegative");
    if (!(q.lambda > 0.0)) diag.push_back("run.lambda: must be positive");
  }
  if (!diag.empty()) throw ConfigError(diag);
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError({"cannot read config file " + path.string()});
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError({std::string("malformed JSON: ") + e.what()});
  }
  return parse_config(j);
}

nlohmann::json to_json(const ExperimentConfig& cfg) {
  const auto& p = cfg.params;
  nlohmann::json params{{"N", p.N},
                        {"theta", p.theta},
                        {"diffusion", p.diffusion},
                        {"interaction_variance", p.interaction_variance},
                        {"domain_lo", p.domain_lo},
                        {"domain_hi", p.domain_hi},
                        {"dim", p.dim},
                        {"s", p.s},
                        {"gamma_cap", p.gamma_cap},
                        {"density_ceiling", p.density_ceiling},
                        {"r", cfg.r}};
  if (cfg.kernel_r_variance) params["kernel_r_variance"] = *cfg.kernel_r_variance;
  if (cfg.kernel_gamma_variance) params["kernel_gamma_variance"] = *cfg.kernel_gamma_variance;
  const auto& r = cfg.run;
  nlohmann::json run{{"horizon", r.horizon},       {"dt", r.dt},         {"snapshot_every", r.snapshot_every},
                     {"initial_count", r.initial_count}, {"stepper", r.stepper}, {"grid_h", r.grid_h},
                     {"paths", r.paths},           {"sde_dt", r.sde_dt}, {"burn_in", r.burn_in},
                     {"epsilons", r.epsilons},     {"lambda", r.lambda}};
  return {{"experiment", to_string(cfg.kind)},
          {"preset", cfg.preset},
          {"seed", cfg.seed},
          {"output", cfg.output},
          {"threads", cfg.threads},
          {"params", params},
          {"run", run}};
}

DemographyModel build_model(const ExperimentConfig& cfg) {
  DemographyModel m = model_by_name(cfg.preset, cfg.params);
  if (cfg.r != 1.0) {
    m.r = RateFunction::constant(cfg.r);
    m.mu_cap = std::max(bound_mu(m, cfg.params.density_ceiling), 1e-6);
  }
  if (cfg.kernel_r_variance) m.kernel_r = GaussianKernel{cfg.params.dim, *cfg.kernel_r_variance};
  if (cfg.kernel_gamma_variance) m.kernel_gamma = GaussianKernel{cfg.params.dim, *cfg.kernel_gamma_variance};
  return m;
}

nlohmann::json ValidationReport::to_json() const {
  return {{"ok", ok()}, {"errors", errors}, {"advisories", advisories}};
}

ValidationReport validate_config(const ExperimentConfig& cfg) {
  ValidationReport rep;
  const auto& p = cfg.params;
  if (!(p.diffusion > 0.0)) {
    rep.errors.push_back(fmt::format("dispersal covariance not positive definite (variance {:.6g})", 2.0 * p.diffusion));
  }
  if (!(cfg.r >= 0.0 && cfg.r <= 1.0)) {
    rep.errors.push_back(fmt::format("establishment probability r = {:.6g} outside [0, 1]", cfg.r));
  }
  if (!rep.ok()) return rep;

  const double lambda_max = 2.0 * p.diffusion;
  if (cfg.kernel_r_variance || cfg.kernel_gamma_variance) {
    const double var_r = cfg.kernel_r_variance.value_or(p.interaction_variance);
    const double var_g = cfg.kernel_gamma_variance.value_or(p.interaction_variance);
    const auto kw = validate_kernel_widths(var_r, var_g, lambda_max, p.theta);
    if (!kw.ok) rep.advisories.push_back(kw.message);
  }
  const double eps = std::sqrt(p.interaction_variance);
  const double noise = 1.0 / (p.theta * eps * eps);
  const double resolution = p.theta / (p.N * std::pow(eps, p.dim));
  constexpr double kFlag = 0.5;
  if (noise >= kFlag) {
    rep.advisories.push_back(fmt::format(
        "scaling regime: 1/(theta eps^2) = {:.6g} is not small; dispersal is not fast relative to the kernel", noise));
  }
  if (resolution >= kFlag) {
    rep.advisories.push_back(fmt::format(
        "scaling regime: theta/(N eps^d) = {:.6g} is O(1); demographic noise does not vanish at this size",
        resolution));
  }
  return rep;
}

}  // namespace popdyn
