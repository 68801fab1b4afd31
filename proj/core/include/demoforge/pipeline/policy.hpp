#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "demoforge/demos/envs.hpp"
#include "demoforge/nn/mlp.hpp"
#include "demoforge/nn/trainer.hpp"

namespace demoforge {

enum class EnsembleStrategy { Split, SampleWithReplacement, Shuffle };
enum class Aggregation { Single, Mean };

std::string to_string(EnsembleStrategy s);
EnsembleStrategy ensemble_strategy_from_string(const std::string& s);

struct PolicyConfig {
  std::vector<int> hidden_dims = {128, 128, 128};
  nn::TrainConfig train{.epochs = 500, .batch_size = 128, .learning_rate = 1e-3, .linear_decay = true};
};

/// One or more state -> action regressors; predictions are the coordinate-wise
/// mean of member outputs.
struct PolicyBundle {
  std::vector<nn::MlpModel> members;
  Aggregation aggregation = Aggregation::Single;
  EnsembleStrategy strategy = EnsembleStrategy::Shuffle;

  std::size_t size() const { return members.size(); }
  Matrix predict(const Matrix& states) const;
};

/// Index sets each member trains on. split: a seeded permutation cut into n
/// disjoint near-equal parts; sample_with_replacement: n bootstrap draws of
/// size N; shuffle: the full set for every member (members differ only by
/// seed, hence data order and init). Throws ConfigError for split with n > N.
std::vector<std::vector<std::size_t>> member_training_sets(std::size_t dataset_size, EnsembleStrategy strategy,
                                                           int n, std::uint64_t seed);

/// Behavioral cloning: MSE regression from states to actions for every member.
PolicyBundle train_bc(const DemoSet& dataset, EnsembleStrategy strategy, int n, const PolicyConfig& config,
                      std::uint64_t seed);

BatchPolicy as_batch_policy(const PolicyBundle& bundle);

}  // namespace demoforge
