#pragma once
// Small synthetic datasets with hidden ground truth, plus label-aware scores.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "demoforge/nn/mlp.hpp"
#include "demoforge/rng.hpp"

namespace synthetic {

using demoforge::nn::Matrix;
using demoforge::nn::Vector;

struct Contaminated {
  Matrix clean;    // 4 x n, on a 2-D manifold
  Matrix values;   // clean plus sigma = 1/6 Gaussian noise on corrupted columns
  std::vector<std::uint8_t> corrupted;
};

/// Points (u, v, sin(pi u), u v) with u, v ~ U[-1, 1]; a fraction of the
/// columns receives i.i.d. N(0, (1/6)^2) noise on every coordinate.
inline Contaminated manifold_with_outliers(int n, double fraction, std::uint64_t seed) {
  auto rng = demoforge::make_rng(seed);
  Contaminated out{Matrix(4, n), Matrix(4, n), std::vector<std::uint8_t>(static_cast<std::size_t>(n), 0)};
  for (int j = 0; j < n; ++j) {
    const double u = 2.0 * demoforge::uniform01(rng) - 1.0;
    const double v = 2.0 * demoforge::uniform01(rng) - 1.0;
    out.clean.col(j) << u, v, std::sin(M_PI * u), u * v;
    out.values.col(j) = out.clean.col(j);
    if (demoforge::uniform01(rng) < fraction) {
      out.corrupted[static_cast<std::size_t>(j)] = 1;
      for (int r = 0; r < 4; ++r) out.values(r, j) += demoforge::standard_normal(rng) / 6.0;
    }
  }
  return out;
}

/// Probability that a random positive outscores a random negative (ties count half).
inline double auroc(const Vector& scores, const std::vector<std::uint8_t>& positive) {
  std::vector<std::size_t> order(positive.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](auto a, auto b) {
    return scores(static_cast<Eigen::Index>(a)) < scores(static_cast<Eigen::Index>(b));
  });
  double rank_sum = 0.0, pos = 0.0;
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j < order.size() &&
           scores(static_cast<Eigen::Index>(order[j])) == scores(static_cast<Eigen::Index>(order[i]))) {
      ++j;
    }
    const double mid = 0.5 * static_cast<double>(i + j + 1);
    for (std::size_t k = i; k < j; ++k) {
      if (positive[order[k]]) {
        rank_sum += mid;
        pos += 1.0;
      }
    }
    i = j;
  }
  const double neg = static_cast<double>(positive.size()) - pos;
  return (rank_sum - pos * (pos + 1.0) / 2.0) / (pos * neg);
}

}  // namespace synthetic

namespace synthetic {

struct Conditional {
  Matrix targets;  // 2 x n: (u, sin(pi u))
  Matrix conds;    // 1 x n: u + N(0, 0.05^2)
};

/// 1-D curve in 2-D whose position is weakly given by the condition.
inline Conditional curve_pairs(int n, std::uint64_t seed) {
  auto rng = demoforge::make_rng(seed);
  Conditional out{Matrix(2, n), Matrix(1, n)};
  for (int j = 0; j < n; ++j) {
    const double u = 2.0 * demoforge::uniform01(rng) - 1.0;
    out.targets.col(j) << u, std::sin(M_PI * u);
    out.conds(0, j) = u + 0.05 * demoforge::standard_normal(rng);
  }
  return out;
}

inline Matrix add_gaussian(const Matrix& x, double sigma, std::uint64_t seed) {
  auto rng = demoforge::make_rng(seed);
  Matrix out = x;
  for (Eigen::Index i = 0; i < out.size(); ++i) out.data()[i] += sigma * demoforge::standard_normal(rng);
  return out;
}

inline double mean_sq_dist(const Matrix& a, const Matrix& b) {
  return (a - b).colwise().squaredNorm().mean();
}

}  // namespace synthetic

#include "demoforge/diffusion/schedule.hpp"

namespace synthetic {

/// Bayes-optimal timestep MAE for curve_pairs: the exact posterior over t given
/// (x_t, condition) is evaluated on a grid over the curve parameter u, and its
/// median is scored. No learned predictor can beat this on average.
inline double curve_bayes_timestep_mae(const demoforge::DiffusionSchedule& s, int samples, std::uint64_t seed) {
  const auto ref = curve_pairs(20000, seed ^ 0x5a5a);
  const Vector mu = ref.targets.rowwise().mean();
  const Vector sd = ((ref.targets.colwise() - mu).array().square().rowwise().mean()).sqrt();
  const int grid = 801;
  Matrix xg(2, grid);
  Vector ug(grid);
  for (int g = 0; g < grid; ++g) {
    ug(g) = -1.0 + 2.0 * g / (grid - 1);
    xg(0, g) = (ug(g) - mu(0)) / sd(0);
    xg(1, g) = (std::sin(M_PI * ug(g)) - mu(1)) / sd(1);
  }
  auto rng = demoforge::make_rng(seed);
  double total = 0.0;
  std::vector<double> logp(static_cast<std::size_t>(s.T) + 1);
  for (int i = 0; i < samples; ++i) {
    const double u = 2.0 * demoforge::uniform01(rng) - 1.0;
    const double c = u + 0.05 * demoforge::standard_normal(rng);
    const int t = 1 + static_cast<int>(demoforge::uniform01(rng) * s.T);
    Vector xt(2);
    xt << (u - mu(0)) / sd(0), (std::sin(M_PI * u) - mu(1)) / sd(1);
    xt = s.alpha[t] * xt;
    for (int d = 0; d < 2; ++d) xt(d) += s.sigma[t] * demoforge::standard_normal(rng);
    double best = -1e300;
    for (int k = 1; k <= s.T; ++k) {
      // log sum_g prior(u_g | c) N(x_t; alpha_k x_g, sigma_k^2 I), via log-sum-exp.
      std::vector<double> terms(grid);
      double m = -1e300;
      for (int g = 0; g < grid; ++g) {
        const double du = (ug(g) - c) / 0.05;
        const double d2 = (xt - s.alpha[k] * xg.col(g)).squaredNorm();
        terms[static_cast<std::size_t>(g)] = -0.5 * du * du - 0.5 * d2 / (s.sigma[k] * s.sigma[k]);
        m = std::max(m, terms[static_cast<std::size_t>(g)]);
      }
      double acc = 0.0;
      for (double v : terms) acc += std::exp(v - m);
      logp[static_cast<std::size_t>(k)] = m + std::log(acc) - 2.0 * std::log(s.sigma[k]);
      best = std::max(best, logp[static_cast<std::size_t>(k)]);
    }
    double norm = 0.0;
    for (int k = 1; k <= s.T; ++k) norm += std::exp(logp[static_cast<std::size_t>(k)] - best);
    double cdf = 0.0;
    int median = s.T;
    for (int k = 1; k <= s.T; ++k) {
      cdf += std::exp(logp[static_cast<std::size_t>(k)] - best) / norm;
      if (cdf >= 0.5) {
        median = k;
        break;
      }
    }
    total += std::abs(median - t);
  }
  return total / samples;
}

}  // namespace synthetic
