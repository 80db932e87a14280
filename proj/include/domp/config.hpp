#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "domp/experiments.hpp"
#include "domp/theory.hpp"

namespace domp {

/// Theory inputs; unset values are measured from the generated designs.
struct TheoryConfig {
  std::optional<double> mu_max;
  std::optional<double> theta_min_scaled;
  double epsilon = 0.5;
  std::optional<std::int64_t> machines_available;
};

struct RunConfig {
  ExperimentConfig experiment;
  TheoryConfig theory;
};

/// Parses the JSON document. Unknown keys and type errors throw
/// Error(Config) naming the offending key, e.g. "gen.alpha: expected a number".
RunConfig parse_config(std::string_view text);
RunConfig load_config(const std::filesystem::path& path);

/// Canonical JSON text of a config (parse_config accepts it back).
std::string config_to_json(const RunConfig& cfg);

/// Resolves the theory parameters. Measured mu_max is the largest coherence
/// over the trial-0 designs; measured theta_min_scaled is the smallest
/// |theta_i| ||x_i|| over support and machines.
theory::TheoryParams resolve_theory_params(const RunConfig& cfg);

std::string version_string();

/// Writes `<csv>.manifest.json`: config echo, version and master seed.
void write_manifest(const RunConfig& cfg, const std::filesystem::path& csv_path);

}  // namespace domp
