#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "demoforge/nn/adam.hpp"
#include "demoforge/rng.hpp"

namespace demoforge::nn {

struct TrainConfig {
  int epochs = 1;
  int batch_size = 128;
  double learning_rate = 1e-3;
  bool linear_decay = true;
};

struct TrainHistory {
  std::vector<double> epoch_loss;  // mean batch loss per epoch
};

/// Fills inputs/targets (columns = samples) for the given sample indices. May
/// draw from rng, e.g. to resample diffusion timesteps per step.
using BatchBuilder =
    std::function<void(std::span<const std::size_t> indices, Rng& rng, Matrix& inputs, Matrix& targets)>;

/// Adam on MSE with per-epoch reshuffling (without replacement); the last
/// partial batch is kept. Throws TrainingError when a batch loss is not finite.
TrainHistory train_regression(MlpModel& model, std::size_t sample_count, const TrainConfig& config,
                              Rng& rng, const BatchBuilder& build_batch);

/// Convenience overload for fixed inputs/targets.
TrainHistory train_regression(MlpModel& model, const Matrix& inputs, const Matrix& targets,
                              const TrainConfig& config, Rng& rng);

/// Gathers columns of `source` at `indices` into `out`.
void gather_columns(const Matrix& source, std::span<const std::size_t> indices, Matrix& out);

}  // namespace demoforge::nn
