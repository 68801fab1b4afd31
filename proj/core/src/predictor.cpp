#include "demoforge/restore/predictor.hpp"

#include <algorithm>
#include <cmath>

#include "decimal.hpp"
#include "demoforge/error.hpp"

namespace demoforge {

std::string predictor_tag(DiffusionRole role) { return role == DiffusionRole::StateModel ? "psi_s" : "psi_a"; }

int timestep_from_output(double raw, int T) {
  const double clamped = std::isnan(raw) ? 0.0 : std::clamp(raw, 0.0, 1.0);
  return static_cast<int>(std::lround(clamped * T));
}

Vector NoisePredictor::predict_raw(const Matrix& samples, const Matrix& conds) const {
  if (samples.cols() != conds.cols()) throw ShapeError("predictor samples and conditions differ in count");
  if (samples.rows() != target_norm.dim() || conds.rows() != cond_norm.dim()) {
    throw ShapeError("predictor input dimension mismatch");
  }
  Matrix in(samples.rows() + conds.rows(), samples.cols());
  in.topRows(samples.rows()) = target_norm.apply(samples);
  in.bottomRows(conds.rows()) = cond_norm.apply(conds);
  return nn::mlp_forward_batch(net, in).row(0).transpose();
}

std::vector<int> NoisePredictor::predict_t(const Matrix& samples, const Matrix& conds) const {
  const Vector raw = predict_raw(samples, conds);
  std::vector<int> out(static_cast<std::size_t>(raw.size()));
  for (Eigen::Index j = 0; j < raw.size(); ++j) out[static_cast<std::size_t>(j)] = timestep_from_output(raw(j), T);
  return out;
}

NoisePredictor train_predictor(const Matrix& targets, const Matrix& conds, DiffusionRole role,
                               const DiffusionSchedule& schedule, const PredictorConfig& config,
                               std::uint64_t seed, nn::TrainHistory* history) {
  if (targets.cols() == 0) throw EmptyBatchError("predictor training set is empty");
  if (targets.cols() != conds.cols()) throw ShapeError("targets and conditions differ in sample count");
  NoisePredictor p;
  p.role = role;
  p.T = schedule.T;
  p.target_norm = nn::Standardizer::fit(targets);
  p.cond_norm = nn::Standardizer::fit(conds);
  const int d = static_cast<int>(targets.rows());
  const int c = static_cast<int>(conds.rows());
  p.net = nn::mlp_init(nn::MlpSpec{d + c, config.hidden_dims, 1}, seed);

  const Matrix x0 = p.target_norm.apply(targets);
  const Matrix cn = p.cond_norm.apply(conds);
  std::uniform_int_distribution<int> pick_t(1, schedule.T);
  Rng rng = make_rng(derive_seed(seed, "order"));
  auto h = nn::train_regression(
      p.net, static_cast<std::size_t>(x0.cols()), config.train, rng,
      [&](std::span<const std::size_t> idx, Rng& r, Matrix& in, Matrix& out) {
        const auto b = static_cast<Eigen::Index>(idx.size());
        in.resize(d + c, b);
        out.resize(1, b);
        for (Eigen::Index j = 0; j < b; ++j) {
          const auto src = static_cast<Eigen::Index>(idx[static_cast<std::size_t>(j)]);
          const int t = pick_t(r);
          const auto ti = static_cast<std::size_t>(t);
          for (int i = 0; i < d; ++i) in(i, j) = schedule.alpha[ti] * x0(i, src) + schedule.sigma[ti] * standard_normal(r);
          in.col(j).tail(c) = cn.col(src);
          out(0, j) = static_cast<double>(t) / schedule.T;
        }
      });
  if (history) *history = std::move(h);
  return p;
}

PredictorMetrics evaluate_predictor(const NoisePredictor& predictor, const DiffusionSchedule& schedule,
                                    const Matrix& targets, const Matrix& conds, std::uint64_t seed) {
  if (targets.cols() == 0) throw EmptyBatchError("predictor evaluation set is empty");
  Rng rng = make_rng(seed);
  std::uniform_int_distribution<int> pick_t(1, schedule.T);
  const Matrix x0 = predictor.target_norm.apply(targets);
  Matrix noised(x0.rows(), x0.cols());
  std::vector<int> truth(static_cast<std::size_t>(x0.cols()));
  for (Eigen::Index j = 0; j < x0.cols(); ++j) {
    const int t = pick_t(rng);
    truth[static_cast<std::size_t>(j)] = t;
    const auto ti = static_cast<std::size_t>(t);
    for (Eigen::Index i = 0; i < x0.rows(); ++i) {
      noised(i, j) = schedule.alpha[ti] * x0(i, j) + schedule.sigma[ti] * standard_normal(rng);
    }
  }
  // Noised latents live in standardized space; map back so predict_raw sees raw units.
  const Vector raw = predictor.predict_raw(predictor.target_norm.invert(noised), conds);
  PredictorMetrics m;
  for (Eigen::Index j = 0; j < raw.size(); ++j) {
    const int t = truth[static_cast<std::size_t>(j)];
    const double target = static_cast<double>(t) / schedule.T;
    const double clamped = std::clamp(raw(j), 0.0, 1.0);
    m.mae_steps += std::abs(timestep_from_output(raw(j), schedule.T) - t);
    m.normalized_mse += (clamped - target) * (clamped - target);
  }
  m.mae_steps /= static_cast<double>(raw.size());
  m.normalized_mse /= static_cast<double>(raw.size());
  return m;
}

nn::Checkpoint to_checkpoint(const NoisePredictor& predictor) {
  nn::Checkpoint ckpt;
  ckpt.role = predictor_tag(predictor.role);
  ckpt.model = predictor.net;
  ckpt.attributes = {
      {"T", std::to_string(predictor.T)},
      {"target_mean", detail::encode_vector(predictor.target_norm.mean)},
      {"target_scale", detail::encode_vector(predictor.target_norm.scale)},
      {"cond_mean", detail::encode_vector(predictor.cond_norm.mean)},
      {"cond_scale", detail::encode_vector(predictor.cond_norm.scale)},
  };
  return ckpt;
}

NoisePredictor predictor_from_checkpoint(const nn::Checkpoint& ckpt) {
  NoisePredictor p;
  if (ckpt.role == "psi_s") {
    p.role = DiffusionRole::StateModel;
  } else if (ckpt.role == "psi_a") {
    p.role = DiffusionRole::ActionModel;
  } else {
    throw FormatError("checkpoint role '" + ckpt.role + "' is not a timestep predictor");
  }
  try {
    p.net = ckpt.model;
    p.T = std::stoi(ckpt.attributes.at("T"));
    p.target_norm = {detail::decode_vector(ckpt.attributes.at("target_mean")),
                     detail::decode_vector(ckpt.attributes.at("target_scale"))};
    p.cond_norm = {detail::decode_vector(ckpt.attributes.at("cond_mean")),
                   detail::decode_vector(ckpt.attributes.at("cond_scale"))};
  } catch (const std::out_of_range&) {
    throw FormatError("predictor checkpoint lacks normalization attributes");
  }
  if (p.net.spec.input_dim != p.target_norm.dim() + p.cond_norm.dim() || p.net.spec.output_dim != 1) {
    throw FormatError("predictor checkpoint dims disagree with its attributes");
  }
  return p;
}

}  // namespace demoforge
