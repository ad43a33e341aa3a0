#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "popdyn/config.hpp"

namespace popdyn {

struct ExperimentResult {
  std::filesystem::path directory;
  /// Artifact names relative to `directory`, manifest last.
  std::vector<std::string> files;
  nlohmann::json summary;
};

/// Runs the configured experiment and writes its CSVs, SVGs and manifest.json under cfg.output.
/// Errors from the numerics are rethrown with the experiment name prefixed.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

std::string toolkit_version();

}  // namespace popdyn
