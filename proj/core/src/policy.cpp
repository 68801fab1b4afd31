#include "demoforge/pipeline/policy.hpp"

#include <algorithm>
#include <numeric>

#include "demoforge/error.hpp"

namespace demoforge {

std::string to_string(EnsembleStrategy s) {
  switch (s) {
    case EnsembleStrategy::Split:
      return "split";
    case EnsembleStrategy::SampleWithReplacement:
      return "sample_with_replacement";
    case EnsembleStrategy::Shuffle:
      return "shuffle";
  }
  return "shuffle";
}

EnsembleStrategy ensemble_strategy_from_string(const std::string& s) {
  if (s == "split") return EnsembleStrategy::Split;
  if (s == "sample_with_replacement") return EnsembleStrategy::SampleWithReplacement;
  if (s == "shuffle") return EnsembleStrategy::Shuffle;
  throw ConfigError("unknown ensemble strategy '" + s + "'");
}

Matrix PolicyBundle::predict(const Matrix& states) const {
  if (members.empty()) throw InvalidSpecError("policy bundle has no members");
  if (members.size() == 1) return nn::mlp_forward_batch(members.front(), states);
  Matrix sum = nn::mlp_forward_batch(members.front(), states);
  for (std::size_t i = 1; i < members.size(); ++i) sum += nn::mlp_forward_batch(members[i], states);
  return sum / static_cast<double>(members.size());
}

std::vector<std::vector<std::size_t>> member_training_sets(std::size_t dataset_size, EnsembleStrategy strategy,
                                                           int n, std::uint64_t seed) {
  if (n < 1) throw ConfigError("ensemble size must be at least 1");
  if (dataset_size == 0) throw ConfigError("dataset is empty");
  const auto members = static_cast<std::size_t>(n);
  std::vector<std::vector<std::size_t>> sets(members);
  std::vector<std::size_t> all(dataset_size);
  std::iota(all.begin(), all.end(), std::size_t{0});
  switch (strategy) {
    case EnsembleStrategy::Shuffle:
      for (auto& s : sets) s = all;
      break;
    case EnsembleStrategy::Split: {
      if (members > dataset_size) throw ConfigError("split ensemble needs n <= dataset size");
      Rng rng = make_rng(derive_seed(seed, "bc.split"));
      std::shuffle(all.begin(), all.end(), rng);
      for (std::size_t m = 0; m < members; ++m) {
        const std::size_t lo = m * dataset_size / members;
        const std::size_t hi = (m + 1) * dataset_size / members;
        sets[m].assign(all.begin() + static_cast<std::ptrdiff_t>(lo), all.begin() + static_cast<std::ptrdiff_t>(hi));
        std::sort(sets[m].begin(), sets[m].end());
      }
      break;
    }
    case EnsembleStrategy::SampleWithReplacement:
      for (std::size_t m = 0; m < members; ++m) {
        Rng rng = make_rng(derive_seed(derive_seed(seed, "bc.bootstrap"), m));
        std::uniform_int_distribution<std::size_t> pick(0, dataset_size - 1);
        sets[m].resize(dataset_size);
        for (auto& idx : sets[m]) idx = pick(rng);
      }
      break;
  }
  return sets;
}

PolicyBundle train_bc(const DemoSet& dataset, EnsembleStrategy strategy, int n, const PolicyConfig& config,
                      std::uint64_t seed) {
  if (dataset.empty()) throw ConfigError("behavioral cloning needs a non-empty dataset");
  const auto sets = member_training_sets(dataset.size(), strategy, n, seed);
  PolicyBundle bundle;
  bundle.strategy = strategy;
  bundle.aggregation = n == 1 ? Aggregation::Single : Aggregation::Mean;
  nn::MlpSpec spec{dataset.state_dim(), config.hidden_dims, dataset.action_dim()};
  for (std::size_t m = 0; m < sets.size(); ++m) {
    const std::uint64_t member_seed = derive_seed(derive_seed(seed, "bc.member"), m);
    nn::MlpModel model = nn::mlp_init(spec, member_seed);
    Rng rng = make_rng(derive_seed(member_seed, "order"));
    const auto& idx = sets[m];
    nn::train_regression(model, idx.size(), config.train, rng,
                         [&](std::span<const std::size_t> batch, Rng&, Matrix& x, Matrix& y) {
                           x.resize(dataset.state_dim(), static_cast<Eigen::Index>(batch.size()));
                           y.resize(dataset.action_dim(), static_cast<Eigen::Index>(batch.size()));
                           for (std::size_t j = 0; j < batch.size(); ++j) {
                             const auto src = static_cast<Eigen::Index>(idx[batch[j]]);
                             x.col(static_cast<Eigen::Index>(j)) = dataset.states().col(src);
                             y.col(static_cast<Eigen::Index>(j)) = dataset.actions().col(src);
                           }
                         });
    bundle.members.push_back(std::move(model));
  }
  return bundle;
}

BatchPolicy as_batch_policy(const PolicyBundle& bundle) {
  return [bundle](const Matrix& states) { return bundle.predict(states); };
}

}  // namespace demoforge
