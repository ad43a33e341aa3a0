// Command-line front end: one subcommand per experiment family.
#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "popdyn/config.hpp"
#include "popdyn/experiments.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kConfigError = 2;
constexpr int kRuntimeError = 3;

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::optional<int> threads;
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--config", c.config, "JSON config or manifest");
  sub->add_option("--seed", c.seed, "64-bit seed (overrides the config)");
  sub->add_option("--out", c.out, "output directory (overrides the config)");
  sub->add_option("--threads", c.threads, "worker threads")->check(CLI::PositiveNumber);
}

popdyn::ExperimentConfig resolve(const Common& c, popdyn::ExperimentKind fallback,
                                 std::initializer_list<popdyn::ExperimentKind> allowed) {
  popdyn::ExperimentConfig cfg;
  bool explicit_kind = false;
  if (!c.config.empty()) {
    cfg = popdyn::load_config(c.config);
    explicit_kind = true;
  }
  bool ok = false;
  for (auto k : allowed) ok = ok || k == cfg.kind;
  if (!explicit_kind || !ok) {
    if (explicit_kind) {
      throw popdyn::ConfigError({fmt::format("experiment '{}' does not match this subcommand",
                                             popdyn::to_string(cfg.kind))});
    }
    cfg.kind = fallback;
  }
  if (c.seed) cfg.seed = *c.seed;
  if (!c.out.empty()) cfg.output = c.out;
  if (c.threads) cfg.threads = *c.threads;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  using popdyn::ExperimentKind;
  CLI::App app{"Spatial population dynamics: simulations, limiting PDEs, lineages and stability"};
  app.set_version_flag("--version", popdyn::toolkit_version());
  app.require_subcommand(1);

  struct Entry {
    const char* name;
    const char* help;
    ExperimentKind kind;
    std::initializer_list<ExperimentKind> allowed;
  };
  const Entry entries[] = {
      {"simulate-ibm", "individual-based simulation", ExperimentKind::ibm, {ExperimentKind::ibm}},
      {"simulate-lookdown", "lookdown simulation", ExperimentKind::lookdown, {ExperimentKind::lookdown}},
      {"solve-pde", "limiting PDE solve", ExperimentKind::pde, {ExperimentKind::pde}},
      {"lineage", "lineage stationary law and SDE occupation", ExperimentKind::lineage,
       {ExperimentKind::lineage, ExperimentKind::identifiability}},
      {"stability", "Fourier stability of the constant equilibrium", ExperimentKind::stability,
       {ExperimentKind::stability}},
      {"sweep", "nonlocal to local convergence sweep", ExperimentKind::convergence_sweep,
       {ExperimentKind::convergence_sweep}},
  };
  Common common;
  std::vector<std::pair<CLI::App*, const Entry*>> subs;
  for (const auto& e : entries) {
    auto* sub = app.add_subcommand(e.name, e.help);
    add_common(sub, common);
    subs.emplace_back(sub, &e);
  }
  auto* validate = app.add_subcommand("validate", "check a config and print errors and advisories");
  add_common(validate, common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    if (validate->parsed()) {
      popdyn::ExperimentConfig cfg = common.config.empty() ? popdyn::ExperimentConfig{}
                                                           : popdyn::load_config(common.config);
      const auto rep = popdyn::validate_config(cfg);
      std::cout << rep.to_json().dump(2) << "\n";
      return rep.ok() ? kOk : kConfigError;
    }
    for (const auto& [sub, entry] : subs) {
      if (!sub->parsed()) continue;
      const auto cfg = resolve(common, entry->kind, entry->allowed);
      const auto rep = popdyn::validate_config(cfg);
      if (!rep.ok()) throw popdyn::ConfigError(rep.errors);
      for (const auto& a : rep.advisories) std::cerr << "advisory: " << a << "\n";
      const auto result = popdyn::run_experiment(cfg);
      for (const auto& f : result.files) std::cout << (result.directory / f).string() << "\n";
      return kOk;
    }
  } catch (const popdyn::ConfigError& e) {
    std::cerr << "config error:\n";
    for (const auto& d : e.diagnostics()) std::cerr << "  " << d << "\n";
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kRuntimeError;
  }
  return kConfigError;
}
