#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "demoforge/diffusion/cond_diffusion.hpp"

namespace demoforge {

struct PredictorConfig {
  std::vector<int> hidden_dims = {256, 256, 256, 256};
  nn::TrainConfig train{.epochs = 500, .batch_size = 128, .learning_rate = 1e-3, .linear_decay = true};
};

/// Regresses t / T from (x_t, condition). Inputs use the same standardization
/// as the matching diffusion model.
struct NoisePredictor {
  DiffusionRole role = DiffusionRole::StateModel;
  nn::MlpModel net;
  int T = 100;
  nn::Standardizer target_norm;
  nn::Standardizer cond_norm;

  /// Raw network output (unclamped t / T) per column; inputs in raw units.
  Vector predict_raw(const Matrix& samples, const Matrix& conds) const;
  /// round(clamp(raw, 0, 1) * T) per column.
  std::vector<int> predict_t(const Matrix& samples, const Matrix& conds) const;
};

/// "psi_s" / "psi_a".
std::string predictor_tag(DiffusionRole role);

int timestep_from_output(double raw, int T);

/// Training pairs are forward-noised on the fly, t ~ Uniform{1..T} per sample
/// per step, target t / T.
NoisePredictor train_predictor(const Matrix& targets, const Matrix& conds, DiffusionRole role,
                               const DiffusionSchedule& schedule, const PredictorConfig& config,
                               std::uint64_t seed, nn::TrainHistory* history = nullptr);

struct PredictorMetrics {
  double mae_steps = 0.0;       // mean |t* - t|
  double normalized_mse = 0.0;  // mean (clamped output - t/T)^2
};

/// Scores the predictor on freshly noised copies of held-out clean pairs.
PredictorMetrics evaluate_predictor(const NoisePredictor& predictor, const DiffusionSchedule& schedule,
                                    const Matrix& targets, const Matrix& conds, std::uint64_t seed);

nn::Checkpoint to_checkpoint(const NoisePredictor& predictor);
NoisePredictor predictor_from_checkpoint(const nn::Checkpoint& ckpt);

}  // namespace demoforge
