#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "demoforge/restore/predictor.hpp"

namespace demoforge {

enum class RestoreVariant {
  Full,         // predicted t*, pass through when t* < t_thres
  NoThreshold,  // predicted t*, restore everything
  NoPredictor,  // restore everything from fixed_t
  Generation,   // sample from N(0, I) at t = T given the condition
};

std::string to_string(RestoreVariant v);
RestoreVariant restore_variant_from_string(const std::string& s);

struct GateConfig {
  RestoreVariant variant = RestoreVariant::Full;
  int t_thres = 20;
  int fixed_t = 50;
};

struct GateOutcome {
  Matrix values;                      // passed or restored samples, input order
  std::vector<int> t_star;            // start step used (or predicted) per sample
  std::vector<std::uint8_t> restored; // 1 = went through reverse diffusion
  std::size_t passed_count = 0;
  std::size_t restored_count = 0;
};

/// Gates flagged samples and restores the rest with `model` conditioned on the
/// pseudo-clean counterparts. sample_seeds[j] seeds column j's noise stream.
/// `predictor` may be null only for NoPredictor and Generation.
GateOutcome gate_and_restore(const Matrix& noisy, const Matrix& conds, const NoisePredictor* predictor,
                             const CondDiffusionModel& model, const GateConfig& config,
                             std::span<const std::uint64_t> sample_seeds);

}  // namespace demoforge
