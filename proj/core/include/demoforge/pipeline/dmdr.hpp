#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "demoforge/error.hpp"
#include "demoforge/pipeline/config.hpp"

namespace demoforge {

enum class Stage { GenDemos, Corrupt, Filter, TrainRestorers, Restore, TrainPolicy, Eval, Report };

std::string to_string(Stage s);

/// A component error tagged with the stage it escaped from. Keeps the
/// original error kind.
class StageError : public Error {
 public:
  StageError(Stage stage, const Error& cause)
      : Error(cause.kind(), to_string(stage) + ": " + cause.what()), stage_(stage) {}
  Stage stage() const noexcept { return stage_; }

 private:
  Stage stage_;
};

/// Runs fn and rethrows any library Error as a StageError for `stage`.
template <typename F>
auto in_stage(Stage stage, F&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const StageError&) {
    throw;
  } catch (const Error& e) {
    throw StageError(stage, e);
  }
}

/// Per-stage seed split from the run's master seed.
std::uint64_t stage_seed(std::uint64_t master, std::string_view stage);

struct Restorers {
  CondDiffusionModel theta_s;  // states | actions
  CondDiffusionModel theta_a;  // actions | states
  NoisePredictor psi_s;
  NoisePredictor psi_a;
};

/// Trains all four restorers on the clean-pair subset D(s^, a^).
Restorers train_restorers(const DemoSet& noisy, const FilterResult& filter, const RunConfig& config,
                          std::uint64_t seed);

struct SubsetCounts {
  std::size_t size = 0;
  std::size_t passed = 0;
  std::size_t restored = 0;
  std::size_t discarded = 0;
};

/// Mean squared error against ground truth over the restored indices.
struct RestorationQuality {
  std::size_t count = 0;
  double corrupted_mse = 0.0;
  double restored_mse = 0.0;
};

struct RestoreReport {
  RestoreVariant variant = RestoreVariant::Full;
  int t_thres = 20;
  int fixed_t = 50;
  std::array<SubsetCounts, 4> subsets;  // indexed by Subset
  std::size_t final_size = 0;
  std::optional<RestorationQuality> state_quality;
  std::optional<RestorationQuality> action_quality;
};

struct RestoreOutput {
  DemoSet dataset;                        // D(s^,a^) + gated D(s',a^) + gated D(s^,a'), pair order kept
  std::vector<std::size_t> source_index;  // pair index in the noisy set for each final pair
  GateOutcome state_gate;                 // over D(s', a^)
  GateOutcome action_gate;                // over D(s^, a')
  RestoreReport report;
};

/// Gates and restores noisy states of D(s',a^) with theta_s given their
/// actions, and noisy actions of D(s^,a') with theta_a given their states.
/// D(s',a') is discarded. Masks of the result flag pairs that differ from
/// ground truth.
RestoreOutput restore_demos(const DemoSet& noisy, const FilterResult& filter, const Restorers& restorers,
                            const GateConfig& gate, std::uint64_t seed);

void save_restore_report(const std::filesystem::path& path, const RestoreReport& report);

struct StageTiming {
  std::string stage;
  double seconds = 0.0;
};

struct DmdrArtifacts {
  DemoSet clean;
  DemoSet noisy;
  FilterOutput filter;
  Restorers restorers;
  RestoreOutput restored;
  std::vector<StageTiming> timings;
};

/// gen -> corrupt -> filter -> train restorers -> gate/restore.
DmdrArtifacts run_dmdr(const RunConfig& config);

/// Writes demos, filter.json, checkpoints, schedule.json and
/// restore_report.json under dir.
void save_artifacts(const std::filesystem::path& dir, const DmdrArtifacts& artifacts);

/// Parameter checksum per saved model role.
std::vector<std::pair<std::string, std::string>> component_checksums(const DmdrArtifacts& artifacts);

}  // namespace demoforge
