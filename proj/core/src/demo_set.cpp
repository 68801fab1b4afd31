#include "demoforge/demos/demo_set.hpp"

#include <algorithm>

#include "demoforge/error.hpp"

namespace demoforge {

DemoSet::DemoSet(int state_dim, int action_dim)
    : state_dim_(state_dim), action_dim_(action_dim), states_(state_dim, 0), actions_(action_dim, 0) {}

DemoSet DemoSet::from_trajectories(const std::vector<Trajectory>& trajectories) {
  if (trajectories.empty()) throw ShapeError("demo set needs at least one trajectory");
  const auto ds = trajectories.front().states.empty() ? 0 : trajectories.front().states.front().size();
  const auto da = trajectories.front().actions.empty() ? 0 : trajectories.front().actions.front().size();
  std::size_t total = 0;
  std::vector<std::uint32_t> lengths;
  for (const auto& t : trajectories) {
    if (t.states.empty() || t.states.size() != t.actions.size()) {
      throw ShapeError("trajectory needs equal, non-zero numbers of states and actions");
    }
    total += t.states.size();
    lengths.push_back(static_cast<std::uint32_t>(t.states.size()));
  }
  Matrix states(ds, static_cast<Eigen::Index>(total));
  Matrix actions(da, static_cast<Eigen::Index>(total));
  Eigen::Index col = 0;
  for (const auto& t : trajectories) {
    for (std::size_t k = 0; k < t.states.size(); ++k, ++col) {
      if (t.states[k].size() != ds || t.actions[k].size() != da) {
        throw ShapeError("inconsistent state/action dimensions within demo set");
      }
      states.col(col) = t.states[k];
      actions.col(col) = t.actions[k];
    }
  }
  return from_columns(std::move(states), std::move(actions), std::move(lengths));
}

DemoSet DemoSet::from_columns(Matrix states, Matrix actions, std::vector<std::uint32_t> lengths) {
  if (states.cols() != actions.cols()) throw ShapeError("state and action counts differ");
  std::size_t total = 0;
  for (auto l : lengths) {
    if (l == 0) throw ShapeError("trajectory lengths must be positive");
    total += l;
  }
  if (total != static_cast<std::size_t>(states.cols())) throw ShapeError("trajectory lengths do not sum to pair count");
  DemoSet d(static_cast<int>(states.rows()), static_cast<int>(actions.rows()));
  d.states_ = std::move(states);
  d.actions_ = std::move(actions);
  d.lengths_ = std::move(lengths);
  d.rebuild_offsets();
  return d;
}

void DemoSet::rebuild_offsets() {
  offsets_.assign(lengths_.size() + 1, 0);
  for (std::size_t i = 0; i < lengths_.size(); ++i) offsets_[i + 1] = offsets_[i] + lengths_[i];
}

PairLocation DemoSet::locate(std::size_t pair) const {
  if (pair >= size()) throw ShapeError("pair index out of range");
  const auto it = std::upper_bound(offsets_.begin(), offsets_.end(), pair);
  const auto traj = static_cast<std::size_t>(it - offsets_.begin()) - 1;
  return {traj, pair - offsets_[traj]};
}

std::size_t DemoSet::pair_index(PairLocation loc) const {
  if (loc.trajectory >= lengths_.size() || loc.step >= lengths_[loc.trajectory]) {
    throw ShapeError("trajectory location out of range");
  }
  return offsets_[loc.trajectory] + loc.step;
}

Trajectory DemoSet::trajectory(std::size_t i) const {
  if (i >= lengths_.size()) throw ShapeError("trajectory index out of range");
  Trajectory t;
  for (std::size_t k = offsets_[i]; k < offsets_[i + 1]; ++k) {
    t.states.emplace_back(states_.col(static_cast<Eigen::Index>(k)));
    t.actions.emplace_back(actions_.col(static_cast<Eigen::Index>(k)));
  }
  return t;
}

const Matrix& DemoSet::clean_states() const {
  if (!clean_states_) throw InvalidSpecError("demo set carries no ground truth");
  return *clean_states_;
}

const Matrix& DemoSet::clean_actions() const {
  if (!clean_actions_) throw InvalidSpecError("demo set carries no ground truth");
  return *clean_actions_;
}

void DemoSet::capture_ground_truth() {
  clean_states_ = states_;
  clean_actions_ = actions_;
}

void DemoSet::set_ground_truth(Matrix clean_states, Matrix clean_actions) {
  if (clean_states.rows() != states_.rows() || clean_states.cols() != states_.cols() ||
      clean_actions.rows() != actions_.rows() || clean_actions.cols() != actions_.cols()) {
    throw ShapeError("ground truth shape mismatch");
  }
  clean_states_ = std::move(clean_states);
  clean_actions_ = std::move(clean_actions);
}

void DemoSet::set_masks(std::vector<std::uint8_t> state_mask, std::vector<std::uint8_t> action_mask) {
  if (state_mask.size() != size() || action_mask.size() != size()) throw ShapeError("mask length mismatch");
  state_mask_ = std::move(state_mask);
  action_mask_ = std::move(action_mask);
}

DemoSet DemoSet::select(std::span<const std::size_t> pairs) const {
  const auto n = static_cast<Eigen::Index>(pairs.size());
  Matrix s(state_dim_, n);
  Matrix a(action_dim_, n);
  std::vector<std::uint32_t> lengths;
  std::size_t prev_traj = static_cast<std::size_t>(-1);
  for (Eigen::Index j = 0; j < n; ++j) {
    const std::size_t p = pairs[static_cast<std::size_t>(j)];
    const auto loc = locate(p);
    s.col(j) = states_.col(static_cast<Eigen::Index>(p));
    a.col(j) = actions_.col(static_cast<Eigen::Index>(p));
    if (lengths.empty() || loc.trajectory != prev_traj) {
      lengths.push_back(1);
    } else {
      ++lengths.back();
    }
    prev_traj = loc.trajectory;
  }
  DemoSet out = n == 0 ? DemoSet(state_dim_, action_dim_) : from_columns(std::move(s), std::move(a), std::move(lengths));
  out.meta_ = meta_;
  if (clean_states_) {
    Matrix cs(state_dim_, n);
    Matrix ca(action_dim_, n);
    for (Eigen::Index j = 0; j < n; ++j) {
      cs.col(j) = clean_states_->col(static_cast<Eigen::Index>(pairs[static_cast<std::size_t>(j)]));
      ca.col(j) = clean_actions_->col(static_cast<Eigen::Index>(pairs[static_cast<std::size_t>(j)]));
    }
    out.clean_states_ = std::move(cs);
    out.clean_actions_ = std::move(ca);
  }
  if (has_masks()) {
    std::vector<std::uint8_t> sm, am;
    for (auto p : pairs) {
      sm.push_back(state_mask_[p]);
      am.push_back(action_mask_[p]);
    }
    out.state_mask_ = std::move(sm);
    out.action_mask_ = std::move(am);
  }
  return out;
}

namespace {

void corrupt_block(Matrix& values, const NoiseSampler& sampler, double p, Rng& rng, std::vector<std::uint8_t>& mask) {
  mask.assign(static_cast<std::size_t>(values.cols()), 0);
  std::bernoulli_distribution hit(p);
  for (Eigen::Index j = 0; j < values.cols(); ++j) {
    if (!hit(rng)) continue;
    mask[static_cast<std::size_t>(j)] = 1;
    for (Eigen::Index r = 0; r < values.rows(); ++r) {
      values(r, j) = static_cast<double>(static_cast<float>(values(r, j) + sampler.draw(rng).value));
    }
  }
}

}  // namespace

DemoSet corrupt(const DemoSet& demos, const NoiseSpec& spec) {
  validate(spec);
  if (!demos.has_ground_truth()) throw InvalidSpecError("corrupt requires demos with ground truth");
  const NoiseSampler sampler(spec);
  DemoSet out = demos;
  out.mutable_states() = demos.clean_states();
  out.mutable_actions() = demos.clean_actions();
  Rng state_rng = make_rng(derive_seed(spec.seed, "corrupt.state"));
  Rng action_rng = make_rng(derive_seed(spec.seed, "corrupt.action"));
  std::vector<std::uint8_t> state_mask, action_mask;
  corrupt_block(out.mutable_states(), sampler, spec.p, state_rng, state_mask);
  corrupt_block(out.mutable_actions(), sampler, spec.p, action_rng, action_mask);
  out.set_masks(std::move(state_mask), std::move(action_mask));
  out.meta().noise = spec;
  return out;
}

}  // namespace demoforge
