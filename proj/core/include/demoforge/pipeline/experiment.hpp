#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "demoforge/pipeline/dmdr.hpp"

namespace demoforge {

/// Per-seed metric of one bundle plus mean and population std.
struct MetricTable {
  MetricKind metric = MetricKind::SuccessRate;
  std::vector<double> per_seed;
  double mean = 0.0;
  double stddev = 0.0;
};

/// `seeds` rollout batches of `episodes` episodes; batch s uses a stream
/// derived from (seed, s).
MetricTable evaluate(const PolicyBundle& bundle, const ToyEnv& env, int episodes, int seeds, std::uint64_t seed);

/// One line of results.csv.
struct ResultRow {
  std::string setting;
  int seed = 0;
  std::string metric;
  double value = 0.0;
};

void write_results_csv(const std::filesystem::path& path, const std::vector<ResultRow>& rows);
std::vector<ResultRow> read_results_csv(const std::filesystem::path& path);

/// Result of one DMDR run plus the BC baseline trained on the raw noisy set.
struct ExperimentRun {
  DmdrArtifacts artifacts;
  PolicyBundle bc_policy;    // trained on the noisy set
  PolicyBundle dmdr_policy;  // trained on the restored set
  std::vector<ResultRow> rows;
};

/// run_dmdr, then BC on noisy and restored data, then evaluation. Rows:
/// bc.<metric> and dmdr.<metric> per evaluation seed, plus filter precision
/// and restoration MSE (seed 0) when ground truth is available.
ExperimentRun run_experiment(const RunConfig& config, const std::string& setting);

/// Writes artifacts, policy checkpoints, results.csv, summary.json and
/// run_manifest.json under dir.
void save_experiment(const std::filesystem::path& dir, const RunConfig& config, const ExperimentRun& run);

enum class AblationAxis { FilterVariant, RestoreVariant, TrustedFraction, NoiseType, NoiseLevel, EnsembleStrategy };

std::string to_string(AblationAxis a);
AblationAxis ablation_axis_from_string(const std::string& s);

/// Setting labels "<axis>=<value>" and the config each one runs.
std::vector<std::pair<std::string, RunConfig>> ablation_settings(const RunConfig& base, AblationAxis axis);

/// Runs every setting on the axis with the base seed. Settings that differ
/// only after restorer training (restore variant, ensemble strategy) share one
/// pipeline run. When out_dir is set each setting writes into its own
/// subdirectory and the combined results.csv goes to out_dir.
std::vector<ResultRow> ablation_suite(const RunConfig& base, AblationAxis axis,
                                      const std::optional<std::filesystem::path>& out_dir = std::nullopt);

/// `summary.json`: mean and std per (setting, metric).
void save_summary_json(const std::filesystem::path& path, const std::vector<ResultRow>& rows);

/// `run_manifest.json`: config entries, config hash, component checksums and
/// stage timings.
void save_run_manifest(const std::filesystem::path& path, const RunConfig& config,
                       const std::vector<std::pair<std::string, std::string>>& checksums,
                       const std::vector<StageTiming>& timings);

/// Reads the config back out of a run manifest.
RunConfig load_manifest_config(const std::filesystem::path& path);

}  // namespace demoforge
