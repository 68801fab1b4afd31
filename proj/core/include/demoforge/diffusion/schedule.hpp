#pragma once

#include <filesystem>
#include <vector>

#include "demoforge/nn/mlp.hpp"
#include "demoforge/rng.hpp"

namespace demoforge {

/// Per-step coefficients under x_t = alpha_t * x_0 + sigma_t * eps.
/// Arrays are indexed by t = 0..T; t = 0 is the data boundary
/// (alpha = 1, sigma = 0, beta = 0).
struct DiffusionSchedule {
  int T = 0;
  double beta_start = 0.0;
  double beta_end = 0.0;
  std::vector<double> beta;
  std::vector<double> alpha;          // sqrt of the cumulative product of (1 - beta)
  std::vector<double> sigma;          // sqrt(1 - alpha^2)
  std::vector<double> posterior_var;  // beta_t (1 - alpha_{t-1}^2) / (1 - alpha_t^2)
};

/// Linear beta from beta_start to beta_end over T steps. Throws ConfigError
/// unless T >= 1 and 0 < beta_start <= beta_end < 1.
DiffusionSchedule make_schedule(int T = 100, double beta_start = 1e-3, double beta_end = 0.2);

struct NoisedSample {
  nn::Vector x_t;
  nn::Vector eps;
};

/// Draws eps ~ N(0, I) and returns (alpha_t x0 + sigma_t eps, eps). t in [0, T];
/// throws ShapeError otherwise.
NoisedSample forward_noise(const DiffusionSchedule& schedule, const nn::Vector& x0, int t, Rng& rng);

/// Sinusoidal embedding of integer timestep t: [sin(t f_i)..., cos(t f_i)...]
/// with f_i = 10000^(-i / (dim/2)). dim must be even.
nn::Vector timestep_embedding(int t, int dim);

/// `schedule.json`: T, beta endpoints and the derived arrays as decimal strings.
void save_schedule_json(const std::filesystem::path& path, const DiffusionSchedule& schedule);
DiffusionSchedule load_schedule_json(const std::filesystem::path& path);

}  // namespace demoforge
