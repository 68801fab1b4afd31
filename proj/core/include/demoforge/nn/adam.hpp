#pragma once

#include "demoforge/nn/mlp.hpp"

namespace demoforge::nn {

struct AdamConfig {
  double base_lr = 1e-3;
  int total_epochs = 1;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  bool linear_decay = true;
};

struct OptimState {
  std::int64_t step_count = 0;
  MlpGrads first_moment;
  MlpGrads second_moment;
  AdamConfig config;

  /// base_lr * (1 - epoch / total_epochs), clamped at zero.
  double learning_rate(int epoch) const;
};

OptimState adam_init(const MlpModel& model, const AdamConfig& config);

/// One bias-corrected Adam update at the learning rate for `epoch`.
void adam_step(MlpModel& model, const MlpGrads& grads, OptimState& opt, int epoch);

}  // namespace demoforge::nn
