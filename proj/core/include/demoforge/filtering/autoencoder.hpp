#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "demoforge/demos/demo_set.hpp"
#include "demoforge/nn/checkpoint.hpp"
#include "demoforge/nn/standardizer.hpp"
#include "demoforge/nn/trainer.hpp"

namespace demoforge {

struct AutoencoderConfig {
  std::vector<int> hidden_dims = {128, 64, 8, 64, 128};
  nn::TrainConfig train{.epochs = 500, .batch_size = 128, .learning_rate = 1e-3, .linear_decay = true};
};

/// Reconstruction autoencoder over standardized inputs. The bottleneck is the
/// narrowest hidden layer; its pre-activation output is the feature z.
struct Autoencoder {
  nn::MlpModel net;
  nn::Standardizer norm;
  std::size_t bottleneck_layer = 0;

  int bottleneck_dim() const { return net.spec.hidden_dims.at(bottleneck_layer); }
  Matrix encode(const Matrix& samples) const;
  Matrix reconstruct(const Matrix& samples) const;
  /// Per-sample squared reconstruction error in standardized units.
  Vector reconstruction_error(const Matrix& samples) const;
};

struct AutoencoderPair {
  Autoencoder state;
  Autoencoder action;
  int bottleneck_dim() const { return state.bottleneck_dim(); }
};

/// Index of the narrowest hidden layer (first one on ties).
std::size_t bottleneck_index(const std::vector<int>& hidden_dims);

/// Trains on every column of `samples` (possibly noisy). Throws TrainingError
/// with the epoch index on divergence.
Autoencoder train_autoencoder(const Matrix& samples, const AutoencoderConfig& config, std::uint64_t seed);

/// phi_s on states and phi_a on actions, each with a seed stream derived from `seed`.
AutoencoderPair train_autoencoders(const DemoSet& demos, const AutoencoderConfig& config, std::uint64_t seed);

struct FeatureTable {
  Matrix state_features;   // bottleneck_dim x N
  Matrix action_features;  // bottleneck_dim x N
};

FeatureTable encode(const AutoencoderPair& ae, const DemoSet& demos);

/// Role tag "phi_s" or "phi_a"; the input standardization travels as attributes.
nn::Checkpoint to_checkpoint(const Autoencoder& ae, const std::string& role);
Autoencoder autoencoder_from_checkpoint(const nn::Checkpoint& ckpt);

}  // namespace demoforge
