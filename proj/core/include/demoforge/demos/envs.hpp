#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "demoforge/demos/demo_set.hpp"
#include "demoforge/rng.hpp"

namespace demoforge {

enum class EnvKind { PointReach, LineTracker };

std::string to_string(EnvKind k);
EnvKind env_kind_from_string(const std::string& s);

enum class MetricKind { SuccessRate, Return };

std::string to_string(MetricKind m);

/// Deterministic toy control task. Only reset() is stochastic.
///
/// point_reach: state (agent x, agent y, goal x, goal y), action = planar
/// velocity clipped to [-1,1]. Success means the agent ends the episode within
/// success_radius of the goal; with stop_at_goal the episode ends as soon as
/// that happens. The scripted expert is clamp(K * (goal - agent)).
///
/// line_tracker: state (position, velocity, target velocity), action =
/// acceleration in [-1,1]. Per-step reward is the forward progress credited up
/// to the target speed, dt * (target - |v - target|), minus effort_penalty * a^2.
/// Position wraps in [-1,1); every wrap shifts the target velocity cyclically
/// within [0.2, 0.8) by lap_target_shift. The expert is clamp(K * (target - v)).
struct ToyEnv {
  EnvKind kind = EnvKind::PointReach;
  int state_dim = 4;
  int action_dim = 2;
  int horizon = 50;
  double dt = 0.1;
  double success_radius = 0.05;
  double expert_gain = 1.0;
  double effort_penalty = 0.01;
  double min_start_distance = 0.2;
  bool stop_at_goal = true;        // point_reach episodes end once the goal is reached
  double lap_target_shift = 0.3;   // line_tracker target moves by this (cyclically in [0.2,0.8)) on each wrap

  static ToyEnv point_reach();
  static ToyEnv line_tracker();
  static ToyEnv make(EnvKind kind);

  MetricKind metric() const {
    return kind == EnvKind::PointReach ? MetricKind::SuccessRate : MetricKind::Return;
  }

  Vector reset(Rng& rng) const;
  /// Advances one step; returns the next state and writes the step reward.
  Vector step(const Vector& state, const Vector& action, double& reward) const;
  Vector expert_action(const Vector& state) const;
  bool success(const Vector& state) const;
};

/// Maps a batch of states (columns) to a batch of actions (columns).
using BatchPolicy = std::function<Matrix(const Matrix&)>;

BatchPolicy expert_policy(const ToyEnv& env);
BatchPolicy zero_policy(const ToyEnv& env);
/// Uniform actions in [-1,1]; a fresh generator per call sequence, seeded.
BatchPolicy random_policy(const ToyEnv& env, std::uint64_t seed);

struct RolloutSummary {
  MetricKind metric = MetricKind::SuccessRate;
  std::vector<double> episode_values;  // 0/1 success or episode return, by episode index
  double mean = 0.0;
  double stddev = 0.0;
  int aborted = 0;  // episodes stopped by a non-finite action
};

/// Runs `episodes` episodes in lockstep. Episode e resets from a stream
/// derived from (seed, e). A non-finite action aborts that episode, which then
/// scores as failure / zero return.
RolloutSummary env_rollout(const ToyEnv& env, const BatchPolicy& policy, int episodes, std::uint64_t seed);

/// Rolls out the scripted expert until at least n_pairs pairs are recorded.
/// Values are stored at float precision; ground truth is captured. Throws
/// GenerationError if a point_reach expert trajectory fails to reach its goal.
DemoSet gen_expert_demos(const ToyEnv& env, std::size_t n_pairs, std::uint64_t seed);

}  // namespace demoforge
