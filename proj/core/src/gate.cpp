#include "demoforge/restore/gate.hpp"

#include "demoforge/error.hpp"

namespace demoforge {

std::string to_string(RestoreVariant v) {
  switch (v) {
    case RestoreVariant::Full: return "full";
    case RestoreVariant::NoThreshold: return "no_threshold";
    case RestoreVariant::NoPredictor: return "no_predictor";
    case RestoreVariant::Generation: return "generation";
  }
  return "full";
}

RestoreVariant restore_variant_from_string(const std::string& s) {
  for (auto v : {RestoreVariant::Full, RestoreVariant::NoThreshold, RestoreVariant::NoPredictor,
                 RestoreVariant::Generation}) {
    if (to_string(v) == s) return v;
  }
  throw ConfigError("unknown restore variant '" + s + "'");
}

GateOutcome gate_and_restore(const Matrix& noisy, const Matrix& conds, const NoisePredictor* predictor,
                             const CondDiffusionModel& model, const GateConfig& config,
                             std::span<const std::uint64_t> sample_seeds) {
  const auto n = static_cast<std::size_t>(noisy.cols());
  const int T = model.schedule.T;
  if (config.t_thres < 0 || config.t_thres > T + 1) throw ConfigError("t_thres outside [0, T+1]");
  if (config.fixed_t < 1 || config.fixed_t > T) throw ConfigError("fixed_t outside [1, T]");

  GateOutcome out;
  out.restored.assign(n, 0);
  switch (config.variant) {
    case RestoreVariant::Full:
    case RestoreVariant::NoThreshold:
      if (!predictor) throw ConfigError("restore variant '" + to_string(config.variant) + "' needs a predictor");
      out.t_star = n ? predictor->predict_t(noisy, conds) : std::vector<int>{};
      break;
    case RestoreVariant::NoPredictor: out.t_star.assign(n, config.fixed_t); break;
    case RestoreVariant::Generation: out.t_star.assign(n, T); break;
  }

  std::vector<int> start(n, 0);
  for (std::size_t j = 0; j < n; ++j) {
    const bool pass = config.variant == RestoreVariant::Full && out.t_star[j] < config.t_thres;
    out.restored[j] = pass ? 0 : 1;
    start[j] = pass ? 0 : out.t_star[j];
  }
  for (auto r : out.restored) (r ? out.restored_count : out.passed_count)++;

  const auto init = config.variant == RestoreVariant::Generation ? RestoreInit::Gaussian : RestoreInit::ScaledInput;
  out.values = n ? restore_batch(model, noisy, conds, start, sample_seeds, init) : noisy;
  return out;
}

}  // namespace demoforge
