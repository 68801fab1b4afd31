#include "demoforge/demos/envs.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

#include "demoforge/error.hpp"

namespace demoforge {

std::string to_string(EnvKind k) { return k == EnvKind::PointReach ? "point_reach" : "line_tracker"; }

EnvKind env_kind_from_string(const std::string& s) {
  if (s == "point_reach") return EnvKind::PointReach;
  if (s == "line_tracker") return EnvKind::LineTracker;
  throw ConfigError("unknown env kind '" + s + "'");
}

std::string to_string(MetricKind m) { return m == MetricKind::SuccessRate ? "success_rate" : "return"; }

ToyEnv ToyEnv::point_reach() { return ToyEnv{}; }

ToyEnv ToyEnv::line_tracker() {
  ToyEnv e;
  e.kind = EnvKind::LineTracker;
  e.state_dim = 3;
  e.action_dim = 1;
  e.horizon = 200;
  e.dt = 0.1;
  e.expert_gain = 2.0;
  return e;
}

ToyEnv ToyEnv::make(EnvKind kind) { return kind == EnvKind::PointReach ? point_reach() : line_tracker(); }

namespace {

constexpr double kTargetLow = 0.2;
constexpr double kTargetHigh = 0.8;

double clamp1(double v) { return std::clamp(v, -1.0, 1.0); }

double to_float(double v) { return static_cast<double>(static_cast<float>(v)); }

Vector round_vec(Vector v) { return v.unaryExpr([](double x) { return to_float(x); }); }

double wrap(double x) {
  // Into [-1, 1).
  double y = std::fmod(x + 1.0, 2.0);
  if (y < 0.0) y += 2.0;
  return y - 1.0;
}

}  // namespace

Vector ToyEnv::reset(Rng& rng) const {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  if (kind == EnvKind::PointReach) {
    Vector s(4);
    do {
      for (int i = 0; i < 4; ++i) s(i) = 0.8 * u(rng);
    } while ((s.head<2>() - s.tail<2>()).norm() < min_start_distance);
    return round_vec(s);
  }
  Vector s(3);
  s(0) = u(rng);
  s(1) = 0.5 * u(rng);
  s(2) = 0.5 + 0.3 * u(rng);
  return round_vec(s);
}

Vector ToyEnv::step(const Vector& state, const Vector& action, double& reward) const {
  if (state.size() != state_dim || action.size() != action_dim) throw ShapeError("env step dimension mismatch");
  Vector next = state;
  if (kind == EnvKind::PointReach) {
    next(0) += dt * clamp1(action(0));
    next(1) += dt * clamp1(action(1));
    next = round_vec(next);
    reward = success(next) ? 1.0 : 0.0;
    return next;
  }
  const double a = clamp1(action(0));
  const double v = std::clamp(state(1) + dt * a, -1.0, 1.0);
  next(1) = v;
  const double pos = state(0) + dt * v;
  next(0) = wrap(pos);
  if (lap_target_shift != 0.0 && (pos < -1.0 || pos >= 1.0)) {
    next(2) = kTargetLow + std::fmod(state(2) - kTargetLow + lap_target_shift, kTargetHigh - kTargetLow);
  }
  next = round_vec(next);
  const double target = state(2);
  reward = dt * (target - std::abs(next(1) - target)) - effort_penalty * a * a;
  return next;
}

Vector ToyEnv::expert_action(const Vector& state) const {
  if (state.size() != state_dim) throw ShapeError("expert state dimension mismatch");
  if (kind == EnvKind::PointReach) {
    Vector a(2);
    a(0) = clamp1(expert_gain * (state(2) - state(0)));
    a(1) = clamp1(expert_gain * (state(3) - state(1)));
    return a;
  }
  Vector a(1);
  a(0) = clamp1(expert_gain * (state(2) - state(1)));
  return a;
}

bool ToyEnv::success(const Vector& state) const {
  if (kind != EnvKind::PointReach) return false;
  return (state.head<2>() - state.tail<2>()).norm() <= success_radius;
}

BatchPolicy expert_policy(const ToyEnv& env) {
  return [env](const Matrix& states) {
    Matrix out(env.action_dim, states.cols());
    for (Eigen::Index j = 0; j < states.cols(); ++j) out.col(j) = env.expert_action(states.col(j));
    return out;
  };
}

BatchPolicy zero_policy(const ToyEnv& env) {
  return [env](const Matrix& states) { return Matrix::Zero(env.action_dim, states.cols()).eval(); };
}

BatchPolicy random_policy(const ToyEnv& env, std::uint64_t seed) {
  auto rng = std::make_shared<Rng>(make_rng(seed));
  return [env, rng](const Matrix& states) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Matrix out(env.action_dim, states.cols());
    for (Eigen::Index j = 0; j < out.cols(); ++j) {
      for (Eigen::Index i = 0; i < out.rows(); ++i) out(i, j) = u(*rng);
    }
    return out;
  };
}

RolloutSummary env_rollout(const ToyEnv& env, const BatchPolicy& policy, int episodes, std::uint64_t seed) {
  if (episodes <= 0) throw ConfigError("episodes must be positive");
  RolloutSummary summary;
  summary.metric = env.metric();
  const auto n = static_cast<Eigen::Index>(episodes);
  Matrix states(env.state_dim, n);
  for (Eigen::Index e = 0; e < n; ++e) {
    Rng rng = make_rng(derive_seed(seed, static_cast<std::uint64_t>(e)));
    states.col(e) = env.reset(rng);
  }
  std::vector<double> returns(static_cast<std::size_t>(episodes), 0.0);
  std::vector<bool> aborted(static_cast<std::size_t>(episodes), false);
  std::vector<bool> done(static_cast<std::size_t>(episodes), false);
  const bool stops = env.kind == EnvKind::PointReach && env.stop_at_goal;
  for (int t = 0; t < env.horizon; ++t) {
    const Matrix actions = policy(states);
    if (actions.rows() != env.action_dim || actions.cols() != n) throw ShapeError("policy output shape mismatch");
    for (Eigen::Index e = 0; e < n; ++e) {
      const auto ei = static_cast<std::size_t>(e);
      if (aborted[ei] || done[ei]) continue;
      if (!actions.col(e).allFinite()) {
        aborted[ei] = true;
        ++summary.aborted;
        continue;
      }
      double reward = 0.0;
      states.col(e) = env.step(states.col(e), actions.col(e), reward);
      returns[ei] += reward;
      done[ei] = stops && env.success(states.col(e));
    }
  }
  summary.episode_values.resize(static_cast<std::size_t>(episodes));
  for (Eigen::Index e = 0; e < n; ++e) {
    const auto ei = static_cast<std::size_t>(e);
    if (aborted[ei]) {
      summary.episode_values[ei] = 0.0;
    } else if (env.metric() == MetricKind::SuccessRate) {
      summary.episode_values[ei] = env.success(states.col(e)) ? 1.0 : 0.0;
    } else {
      summary.episode_values[ei] = returns[ei];
    }
  }
  double sum = 0.0;
  for (double v : summary.episode_values) sum += v;
  summary.mean = sum / episodes;
  double sq = 0.0;
  for (double v : summary.episode_values) sq += (v - summary.mean) * (v - summary.mean);
  summary.stddev = std::sqrt(sq / episodes);
  return summary;
}

DemoSet gen_expert_demos(const ToyEnv& env, std::size_t n_pairs, std::uint64_t seed) {
  if (n_pairs == 0) throw ConfigError("n_pairs must be at least 1");
  std::vector<Trajectory> trajectories;
  std::size_t collected = 0;
  for (std::uint64_t k = 0; collected < n_pairs; ++k) {
    Rng rng = make_rng(derive_seed(seed, k));
    Trajectory traj;
    Vector s = env.reset(rng);
    for (int t = 0; t < env.horizon; ++t) {
      const Vector a = round_vec(env.expert_action(s));
      traj.states.push_back(s);
      traj.actions.push_back(a);
      double reward = 0.0;
      s = env.step(s, a, reward);
      if (env.kind == EnvKind::PointReach && env.stop_at_goal && env.success(s)) break;
    }
    if (env.kind == EnvKind::PointReach && !env.success(s)) {
      throw GenerationError("expert trajectory " + std::to_string(k) + " did not reach its goal");
    }
    collected += traj.states.size();
    trajectories.push_back(std::move(traj));
  }
  DemoSet demos = DemoSet::from_trajectories(trajectories);
  demos.capture_ground_truth();
  demos.meta().env = to_string(env.kind);
  demos.meta().generation_seed = seed;
  return demos;
}

}  // namespace demoforge
