#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "demoforge/diffusion/schedule.hpp"
#include "demoforge/nn/checkpoint.hpp"
#include "demoforge/nn/standardizer.hpp"
#include "demoforge/nn/trainer.hpp"

namespace demoforge {

using nn::Matrix;
using nn::Vector;

/// theta_s restores states given actions; theta_a restores actions given states.
enum class DiffusionRole { StateModel, ActionModel };

std::string role_tag(DiffusionRole role);

struct DiffusionConfig {
  int T = 100;
  double beta_start = 1e-3;
  double beta_end = 0.2;
  int embed_dim = 16;
  std::vector<int> hidden_dims = {256, 256, 256, 256};
  nn::TrainConfig train{.epochs = 2000, .batch_size = 128, .learning_rate = 1e-3, .linear_decay = true};
};

/// Conditional epsilon-prediction model. The network sees
/// concat(noisy target, condition, timestep embedding), all in the
/// standardized space fitted on the training (clean) pairs.
struct CondDiffusionModel {
  DiffusionRole role = DiffusionRole::StateModel;
  nn::MlpModel eps_net;
  DiffusionSchedule schedule;
  nn::Standardizer target_norm;
  nn::Standardizer cond_norm;
  int embed_dim = 16;

  int target_dim() const { return target_norm.dim(); }
  int cond_dim() const { return cond_norm.dim(); }

  /// Epsilon estimate for standardized latents x_t and standardized
  /// conditions, one timestep per column.
  Matrix predict_eps(const Matrix& latents, const Matrix& conds_std, std::span<const int> timesteps) const;

  /// Mean per-sample ||eps - eps_hat||^2 on freshly noised pairs (raw inputs).
  double eval_loss(const Matrix& targets, const Matrix& conds, std::uint64_t seed) const;
};

/// Trains on (target, condition) column pairs with t ~ Uniform{1..T} and fresh
/// eps per sample per step. Throws EmptyBatchError for an empty set and
/// TrainingError on a non-finite loss.
CondDiffusionModel train_cond_diffusion(const Matrix& targets, const Matrix& conds, DiffusionRole role,
                                        const DiffusionConfig& config, std::uint64_t seed,
                                        nn::TrainHistory* history = nullptr);

/// One ancestral step in standardized latent space:
/// x_{t-1} = (x_t - beta_t / sigma_t * eps_hat) / sqrt(1 - beta_t) + sqrt(posterior_var_t) * z,
/// with z = 0 at t = 1. `cond` is in raw units.
Vector reverse_step(const CondDiffusionModel& model, const Vector& latent, const Vector& cond, int t, Rng& rng);

enum class RestoreInit {
  ScaledInput,  // x_{t*} = alpha_{t*} * standardized noisy sample
  Gaussian,     // x_{t*} ~ N(0, I): pure generation
};

/// Restores each column from its own start step down to t = 0. Column j draws
/// its noise from a stream seeded by sample_seeds[j], so results depend on
/// batch composition only through floating-point summation order. Columns with t_start = 0 are returned as is.
Matrix restore_batch(const CondDiffusionModel& model, const Matrix& noisy, const Matrix& conds,
                     std::span<const int> t_start, std::span<const std::uint64_t> sample_seeds,
                     RestoreInit init = RestoreInit::ScaledInput);

Vector restore(const CondDiffusionModel& model, const Vector& noisy, const Vector& cond, int t_start,
               std::uint64_t seed, RestoreInit init = RestoreInit::ScaledInput);

/// Checkpoint with role tag "theta_s"/"theta_a"; normalization and embedding
/// size travel as attributes. The schedule goes to a `schedule.json` sidecar.
nn::Checkpoint to_checkpoint(const CondDiffusionModel& model);
CondDiffusionModel diffusion_from_checkpoint(const nn::Checkpoint& ckpt, const DiffusionSchedule& schedule);

}  // namespace demoforge
