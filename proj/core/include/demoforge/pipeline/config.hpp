#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "demoforge/demos/envs.hpp"
#include "demoforge/demos/noise.hpp"
#include "demoforge/diffusion/cond_diffusion.hpp"
#include "demoforge/filtering/filter.hpp"
#include "demoforge/pipeline/policy.hpp"
#include "demoforge/restore/gate.hpp"

namespace demoforge {

/// Everything a run needs. Defaults are the desk-scale values; see README for
/// the CI profile used by the acceptance suite.
struct RunConfig {
  EnvKind env = EnvKind::PointReach;
  std::optional<double> expert_gain;  // unset: the env's default gain
  std::size_t dataset_size = 10000;
  NoiseSpec noise;
  FilterConfig filter;
  DiffusionConfig diffusion;
  PredictorConfig predictor;
  GateConfig gate;
  PolicyConfig policy;
  EnsembleStrategy ensemble_strategy = EnsembleStrategy::Shuffle;
  int ensemble_size = 1;
  std::uint64_t seed = 0;
  int eval_episodes = 100;
  int eval_seeds = 5;

  /// Batch size shared by every trained component.
  void set_batch_size(int b);

  ToyEnv make_env() const;
};

/// Canonical flat key -> value view, one entry per key in a fixed order.
std::vector<std::pair<std::string, std::string>> config_entries(const RunConfig& config);

/// Every recognized key, in canonical order.
const std::vector<std::string>& config_keys();

/// Applies one `key=value`. Throws ConfigError naming the field for unknown
/// keys, malformed values and out-of-range values. Cross-field constraints are
/// checked by validate().
void apply_override(RunConfig& config, const std::string& key, const std::string& value);

/// Cross-field checks (beta ordering, fixed_t and t_thres against T).
void validate(const RunConfig& config);

/// Parses "key=value" text. `# ...` comments and blank lines are ignored;
/// `[section]` prefixes following keys with "section.". Errors carry
/// `<source>:<line>`.
RunConfig parse_config_text(const std::string& text, const std::string& source = "<config>");

/// Throws IoError when the file cannot be read.
RunConfig parse_config(const std::filesystem::path& path);

/// Canonical text form; parse_config_text(to_config_text(c)) reproduces c.
std::string to_config_text(const RunConfig& config);

/// FNV-1a 64 of the canonical text, hex encoded.
std::string config_hash(const RunConfig& config);

}  // namespace demoforge
