#include "demoforge/filtering/lof.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "demoforge/error.hpp"
#include "demoforge/parallel.hpp"

namespace demoforge {

int effective_neighbor_count(int k, std::size_t n) {
  const auto cap = static_cast<int>(n / 20);
  int eff = std::max(5, std::min(k, cap));
  if (n >= 2) eff = std::min(eff, static_cast<int>(n) - 1);
  return eff;
}

namespace {

// Distances from point i to every point, in a fixed summation order.
void distance_row(const nn::Matrix& x, Eigen::Index i, std::vector<double>& row) {
  const Eigen::Index d = x.rows();
  const Eigen::Index n = x.cols();
  row.resize(static_cast<std::size_t>(n));
  const double* pi = x.col(i).data();
  for (Eigen::Index j = 0; j < n; ++j) {
    const double* pj = x.col(j).data();
    double s = 0.0;
    for (Eigen::Index r = 0; r < d; ++r) {
      const double diff = pi[r] - pj[r];
      s += diff * diff;
    }
    row[static_cast<std::size_t>(j)] = std::sqrt(s);
  }
}

}  // namespace

nn::Vector lof_scores(const nn::Matrix& features, const LofConfig& config) {
  const auto n = static_cast<std::size_t>(features.cols());
  if (config.k < 1 || static_cast<std::size_t>(config.k) >= n) {
    throw ConfigError("LOF needs 1 <= k < n (k=" + std::to_string(config.k) + ", n=" + std::to_string(n) + ")");
  }
  const auto k = static_cast<std::size_t>(config.k);
  std::vector<double> kdist(n), lrd(n);
  nn::Vector scores(static_cast<Eigen::Index>(n));

  // Neighborhoods are recomputed in each pass rather than stored: a cluster of
  // duplicates would otherwise make them O(n^2) in memory.
  parallel_for(n, [&](std::size_t i) {
    thread_local std::vector<double> row, others;
    distance_row(features, static_cast<Eigen::Index>(i), row);
    others.clear();
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) others.push_back(row[j]);
    }
    std::nth_element(others.begin(), others.begin() + static_cast<std::ptrdiff_t>(k - 1), others.end());
    kdist[i] = others[k - 1];
  });

  parallel_for(n, [&](std::size_t i) {
    thread_local std::vector<double> row;
    distance_row(features, static_cast<Eigen::Index>(i), row);
    double reach_sum = 0.0;
    std::size_t count = 0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i || row[j] > kdist[i]) continue;
      reach_sum += std::max(kdist[j], row[j]);
      ++count;
    }
    const double mean_reach = reach_sum / static_cast<double>(count);
    lrd[i] = mean_reach > 0.0 ? std::min(1.0 / mean_reach, config.duplicate_lrd_cap) : config.duplicate_lrd_cap;
  });

  parallel_for(n, [&](std::size_t i) {
    thread_local std::vector<double> row;
    distance_row(features, static_cast<Eigen::Index>(i), row);
    double lrd_sum = 0.0;
    std::size_t count = 0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i || row[j] > kdist[i]) continue;
      lrd_sum += lrd[j];
      ++count;
    }
    scores(static_cast<Eigen::Index>(i)) = (lrd_sum / static_cast<double>(count)) / lrd[i];
  });
  return scores;
}

}  // namespace demoforge
