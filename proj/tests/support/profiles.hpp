#pragma once
// Reduced run profiles. `tiny` exercises plumbing in well under a second;
// `ci` is the acceptance profile (see README, "Acceptance profile").

#include "demoforge/pipeline/config.hpp"

namespace profiles {

inline demoforge::RunConfig tiny(demoforge::EnvKind env = demoforge::EnvKind::PointReach) {
  demoforge::RunConfig c;
  c.env = env;
  c.dataset_size = 600;
  c.filter.autoencoder.train.epochs = 3;
  c.diffusion.hidden_dims = {32, 32};
  c.diffusion.train.epochs = 3;
  c.predictor.hidden_dims = {32, 32};
  c.predictor.train.epochs = 3;
  c.policy.hidden_dims = {32, 32};
  c.policy.train.epochs = 3;
  c.eval_episodes = 5;
  c.eval_seeds = 2;
  return c;
}

inline demoforge::RunConfig ci(demoforge::EnvKind env, std::uint64_t seed) {
  demoforge::RunConfig c;
  c.env = env;
  c.seed = seed;
  c.dataset_size = 10000;
  c.filter.autoencoder.train.epochs = 100;
  c.diffusion.hidden_dims = {128, 128, 128};
  c.diffusion.train.epochs = 300;
  c.predictor.hidden_dims = {128, 128, 128};
  c.predictor.train.epochs = 200;
  c.policy.train.epochs = 100;
  c.eval_episodes = 100;
  c.eval_seeds = 5;
  return c;
}

}  // namespace profiles
