#include "demoforge/nn/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "demoforge/error.hpp"

namespace demoforge::nn {

void gather_columns(const Matrix& source, std::span<const std::size_t> indices, Matrix& out) {
  out.resize(source.rows(), static_cast<Eigen::Index>(indices.size()));
  for (std::size_t j = 0; j < indices.size(); ++j) {
    out.col(static_cast<Eigen::Index>(j)) = source.col(static_cast<Eigen::Index>(indices[j]));
  }
}

TrainHistory train_regression(MlpModel& model, std::size_t sample_count, const TrainConfig& config, Rng& rng,
                              const BatchBuilder& build_batch) {
  TrainHistory history;
  if (config.epochs <= 0) return history;
  if (sample_count == 0) throw EmptyBatchError("training set is empty");
  if (config.batch_size <= 0) throw ConfigError("batch size must be positive");

  AdamConfig adam;
  adam.base_lr = config.learning_rate;
  adam.total_epochs = config.epochs;
  adam.linear_decay = config.linear_decay;
  OptimState opt = adam_init(model, adam);

  std::vector<std::size_t> order(sample_count);
  std::iota(order.begin(), order.end(), std::size_t{0});
  const auto batch = static_cast<std::size_t>(config.batch_size);
  Matrix inputs;
  Matrix targets;
  history.epoch_loss.reserve(static_cast<std::size_t>(config.epochs));

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double loss_sum = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < sample_count; start += batch) {
      const std::size_t len = std::min(batch, sample_count - start);
      std::span<const std::size_t> idx(order.data() + start, len);
      build_batch(idx, rng, inputs, targets);
      LossAndGrads lg = mlp_grad(model, inputs, targets);
      if (!std::isfinite(lg.loss)) throw TrainingError("non-finite training loss", epoch);
      adam_step(model, lg.grads, opt, epoch);
      loss_sum += lg.loss;
      ++batches;
    }
    history.epoch_loss.push_back(loss_sum / static_cast<double>(batches));
  }
  return history;
}

TrainHistory train_regression(MlpModel& model, const Matrix& inputs, const Matrix& targets,
                              const TrainConfig& config, Rng& rng) {
  if (inputs.cols() != targets.cols()) throw ShapeError("inputs/targets sample count mismatch");
  return train_regression(model, static_cast<std::size_t>(inputs.cols()), config, rng,
                          [&](std::span<const std::size_t> idx, Rng&, Matrix& x, Matrix& y) {
                            gather_columns(inputs, idx, x);
                            gather_columns(targets, idx, y);
                          });
}

}  // namespace demoforge::nn
