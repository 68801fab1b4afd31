#pragma once

#include <cstddef>

#include "demoforge/nn/mlp.hpp"

namespace demoforge {

struct LofConfig {
  int k = 50;
  double duplicate_lrd_cap = 1e12;
};

/// Neighbor count used by the filter for n samples: max(5, min(k, n / 20)),
/// then capped at n - 1.
int effective_neighbor_count(int k, std::size_t n);

/// Local Outlier Factor (Breunig et al.) over feature columns, Euclidean
/// distance, exact neighborhoods. A point's neighborhood is every other point
/// within its k-distance (ties at the k-distance are all included; the point
/// itself is excluded by index). When the mean reachability distance is zero,
/// the local reachability density is capped at duplicate_lrd_cap.
/// Throws ConfigError when k < 1 or k >= n.
nn::Vector lof_scores(const nn::Matrix& features, const LofConfig& config);

}  // namespace demoforge
