#pragma once
// Independent reference implementations used by the unit and acceptance
// tests. None of these call into the production code paths they check.

#include <algorithm>
#include <cmath>
#include <vector>

#include "demoforge/nn/mlp.hpp"

namespace oracle {

using demoforge::nn::Matrix;
using demoforge::nn::MlpModel;

/// Central-difference gradient of mean_b ||f(x_b) - y_b||^2, in the same
/// parameter order as the analytic bundle (weights then biases per layer).
inline std::vector<double> finite_difference_grad(MlpModel model, const Matrix& x, const Matrix& y,
                                                  double h = 1e-5) {
  std::vector<double> out;
  const auto loss = [&] { return demoforge::nn::mlp_loss(model, x, y); };
  for (std::size_t l = 0; l < model.weights.size(); ++l) {
    auto probe = [&](double& p) {
      const double saved = p;
      p = saved + h;
      const double up = loss();
      p = saved - h;
      const double down = loss();
      p = saved;
      out.push_back((up - down) / (2.0 * h));
    };
    for (Eigen::Index i = 0; i < model.weights[l].size(); ++i) probe(model.weights[l].data()[i]);
    for (Eigen::Index i = 0; i < model.biases[l].size(); ++i) probe(model.biases[l].data()[i]);
  }
  return out;
}

inline std::vector<double> flatten(const demoforge::nn::MlpGrads& g) {
  std::vector<double> out;
  for (std::size_t l = 0; l < g.weights.size(); ++l) {
    out.insert(out.end(), g.weights[l].data(), g.weights[l].data() + g.weights[l].size());
    out.insert(out.end(), g.biases[l].data(), g.biases[l].data() + g.biases[l].size());
  }
  return out;
}

/// ||a - b|| / max(||a||, ||b||, tiny).
inline double relative_error(const std::vector<double>& a, const std::vector<double>& b) {
  double diff = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    diff += (a[i] - b[i]) * (a[i] - b[i]);
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  return std::sqrt(diff) / std::max({std::sqrt(na), std::sqrt(nb), 1e-300});
}

/// Worst per-coordinate |a - b| / max(|a|, |b|) over coordinates with
/// |a| > floor; smaller coordinates are not scored.
inline double max_coordinate_error(const std::vector<double>& a, const std::vector<double>& b, double floor = 1e-6) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (std::abs(a[i]) <= floor) continue;
    worst = std::max(worst, std::abs(a[i] - b[i]) / std::max(std::abs(a[i]), std::abs(b[i])));
  }
  return worst;
}

/// O(n^2) Local Outlier Factor straight from the Breunig et al. definitions.
/// Points are columns; the neighborhood of p is every q != p with
/// d(p, q) <= k-distance(p).
inline std::vector<double> brute_force_lof(const Matrix& pts, int k, double duplicate_lrd_cap = 1e12) {
  const auto n = static_cast<std::size_t>(pts.cols());
  std::vector<std::vector<double>> d(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double s = 0.0;
      for (Eigen::Index r = 0; r < pts.rows(); ++r) {
        const double diff = pts(r, static_cast<Eigen::Index>(i)) - pts(r, static_cast<Eigen::Index>(j));
        s += diff * diff;
      }
      d[i][j] = std::sqrt(s);
    }
  }
  std::vector<double> kdist(n);
  std::vector<std::vector<std::size_t>> hood(n);
  for (std::size_t p = 0; p < n; ++p) {
    std::vector<double> others;
    for (std::size_t q = 0; q < n; ++q) {
      if (q != p) others.push_back(d[p][q]);
    }
    std::sort(others.begin(), others.end());
    kdist[p] = others[static_cast<std::size_t>(k) - 1];
    for (std::size_t q = 0; q < n; ++q) {
      if (q != p && d[p][q] <= kdist[p]) hood[p].push_back(q);
    }
  }
  std::vector<double> lrd(n);
  for (std::size_t p = 0; p < n; ++p) {
    double sum = 0.0;
    for (auto o : hood[p]) sum += std::max(kdist[o], d[p][o]);
    const double mean = sum / static_cast<double>(hood[p].size());
    lrd[p] = mean > 0.0 ? 1.0 / mean : duplicate_lrd_cap;
  }
  std::vector<double> lof(n);
  for (std::size_t p = 0; p < n; ++p) {
    double sum = 0.0;
    for (auto o : hood[p]) sum += lrd[o] / lrd[p];
    lof[p] = sum / static_cast<double>(hood[p].size());
  }
  return lof;
}

/// Scalar Adam with bias correction and f32 rounding of the written value.
struct ScalarAdam {
  double lr, beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
  double m = 0.0, v = 0.0;
  int t = 0;
  double step(double p, double g) {
    ++t;
    m = beta1 * m + (1 - beta1) * g;
    v = beta2 * v + (1 - beta2) * g * g;
    const double mhat = m / (1 - std::pow(beta1, t));
    const double vhat = v / (1 - std::pow(beta2, t));
    return static_cast<float>(p - lr * mhat / (std::sqrt(vhat) + eps));
  }
};

}  // namespace oracle
