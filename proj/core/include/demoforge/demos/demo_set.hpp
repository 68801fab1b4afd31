#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "demoforge/demos/noise.hpp"
#include "demoforge/nn/mlp.hpp"

namespace demoforge {

using nn::Matrix;
using nn::Vector;

struct Trajectory {
  std::vector<Vector> states;
  std::vector<Vector> actions;
};

struct PairLocation {
  std::size_t trajectory = 0;
  std::size_t step = 0;
  bool operator==(const PairLocation&) const = default;
};

struct DemoMeta {
  std::string env;  // env kind tag, empty when unknown
  std::uint64_t generation_seed = 0;
  std::optional<NoiseSpec> noise;
};

/// Flat storage of every (state, action) pair. Columns are pairs, ordered by
/// trajectory then step; `lengths` recovers the trajectory structure.
class DemoSet {
 public:
  DemoSet() = default;
  DemoSet(int state_dim, int action_dim);

  /// Throws ShapeError on empty or dimension-inconsistent trajectories.
  static DemoSet from_trajectories(const std::vector<Trajectory>& trajectories);

  /// Builds a set from flat columns; lengths must sum to the column count.
  static DemoSet from_columns(Matrix states, Matrix actions, std::vector<std::uint32_t> lengths);

  int state_dim() const { return state_dim_; }
  int action_dim() const { return action_dim_; }
  std::size_t size() const { return static_cast<std::size_t>(states_.cols()); }
  bool empty() const { return size() == 0; }
  std::size_t trajectory_count() const { return lengths_.size(); }
  const std::vector<std::uint32_t>& lengths() const { return lengths_; }

  PairLocation locate(std::size_t pair) const;
  std::size_t pair_index(PairLocation loc) const;
  Trajectory trajectory(std::size_t i) const;

  const Matrix& states() const { return states_; }
  const Matrix& actions() const { return actions_; }
  Matrix& mutable_states() { return states_; }
  Matrix& mutable_actions() { return actions_; }

  bool has_ground_truth() const { return clean_states_.has_value(); }
  const Matrix& clean_states() const;
  const Matrix& clean_actions() const;
  /// Records the current states/actions as the hidden ground truth.
  void capture_ground_truth();
  void set_ground_truth(Matrix clean_states, Matrix clean_actions);

  bool has_masks() const { return !state_mask_.empty(); }
  const std::vector<std::uint8_t>& state_mask() const { return state_mask_; }
  const std::vector<std::uint8_t>& action_mask() const { return action_mask_; }
  void set_masks(std::vector<std::uint8_t> state_mask, std::vector<std::uint8_t> action_mask);

  DemoMeta& meta() { return meta_; }
  const DemoMeta& meta() const { return meta_; }

  /// Subset of pairs (in the given order). Consecutive pairs from the same
  /// source trajectory stay grouped; ground truth and masks are carried over.
  DemoSet select(std::span<const std::size_t> pairs) const;

 private:
  void rebuild_offsets();

  int state_dim_ = 0;
  int action_dim_ = 0;
  std::vector<std::uint32_t> lengths_;
  std::vector<std::size_t> offsets_;  // prefix sums of lengths_
  Matrix states_;
  Matrix actions_;
  std::optional<Matrix> clean_states_;
  std::optional<Matrix> clean_actions_;
  std::vector<std::uint8_t> state_mask_;
  std::vector<std::uint8_t> action_mask_;
  DemoMeta meta_;
};

/// Independently corrupts each state and each action vector with probability
/// spec.p. Corrupted values are rounded to float precision like the stored
/// demos. Ground truth is kept hidden in the result and masks are recorded.
/// Throws InvalidSpecError on an invalid spec or when demos carry
/// no ground truth.
DemoSet corrupt(const DemoSet& demos, const NoiseSpec& spec);

}  // namespace demoforge
