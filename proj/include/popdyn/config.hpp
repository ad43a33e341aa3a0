#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "popdyn/ibm.hpp"
#include "popdyn/presets.hpp"

namespace popdyn {

enum class ExperimentKind { ibm, lookdown, pde, lineage, stability, convergence_sweep, identifiability };

std::string to_string(ExperimentKind kind);
std::optional<ExperimentKind> parse_experiment_kind(const std::string& name);

struct RunParams {
  double horizon = 10.0;
  /// Zero picks the largest stable step.
  double dt = 0.0;
  double snapshot_every = 1.0;
  std::size_t initial_count = 500;
  std::string stepper = "exact";
  /// Grid spacing for PDE solves and density profiles.
  double grid_h = 0.05;
  std::size_t paths = 1000;
  double sde_dt = 0.01;
  double burn_in = 50.0;
  std::vector<double> epsilons{0.8, 0.4, 0.2, 0.1};
  /// Constant speed-up for the identifiability experiment.
  double lambda = 2.0;
};

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::ibm;
  std::string preset = "logistic";
  std::uint64_t seed = 1;
  std::string output = "out";
  int threads = 1;
  PresetParams params;
  /// Constant establishment probability.
  double r = 1.0;
  /// Explicit kernel widths for the kernel-width check.
  std::optional<double> kernel_r_variance;
  std::optional<double> kernel_gamma_variance;
  RunParams run;
};

/// Schema failure with one line per problem.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(std::vector<std::string> diagnostics);
  const std::vector<std::string>& diagnostics() const { return diagnostics_; }

 private:
  std::vector<std::string> diagnostics_;
};

/// Parses a config object, or a manifest written by a previous run (its "config" member).
/// Unknown keys, wrong types and unknown presets are all reported together.
ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config(const std::filesystem::path& path);
nlohmann::json to_json(const ExperimentConfig& cfg);

/// Demography of the configured preset with the config's overrides applied.
DemographyModel build_model(const ExperimentConfig& cfg);

struct ValidationReport {
  std::vector<std::string> errors;
  std::vector<std::string> advisories;
  bool ok() const { return errors.empty(); }
  nlohmann::json to_json() const;
};

/// Hard errors: non-positive-definite dispersal covariance, r outside [0, 1].
/// Advisories: the kernel-width inequality and the finite-size scaling ratios 1/(theta eps^2) and
/// theta/(N eps^d), flagged from 0.5 upwards.
ValidationReport validate_config(const ExperimentConfig& cfg);

}  // namespace popdyn
