#include "demoforge/diffusion/cond_diffusion.hpp"

#include <algorithm>
#include <cmath>

#include "decimal.hpp"
#include "demoforge/error.hpp"

namespace demoforge {

std::string role_tag(DiffusionRole role) { return role == DiffusionRole::StateModel ? "theta_s" : "theta_a"; }

namespace {

Matrix assemble_inputs(const Matrix& latents, const Matrix& conds_std, std::span<const int> timesteps, int embed_dim) {
  const Eigen::Index d = latents.rows();
  const Eigen::Index c = conds_std.rows();
  Matrix in(d + c + embed_dim, latents.cols());
  in.topRows(d) = latents;
  in.middleRows(d, c) = conds_std;
  for (Eigen::Index j = 0; j < latents.cols(); ++j) {
    in.col(j).tail(embed_dim) = timestep_embedding(timesteps[static_cast<std::size_t>(j)], embed_dim);
  }
  return in;
}

}  // namespace

Matrix CondDiffusionModel::predict_eps(const Matrix& latents, const Matrix& conds_std,
                                       std::span<const int> timesteps) const {
  if (latents.cols() != conds_std.cols() || static_cast<std::size_t>(latents.cols()) != timesteps.size()) {
    throw ShapeError("latent/condition/timestep batch sizes differ");
  }
  return nn::mlp_forward_batch(eps_net, assemble_inputs(latents, conds_std, timesteps, embed_dim));
}

double CondDiffusionModel::eval_loss(const Matrix& targets, const Matrix& conds, std::uint64_t seed) const {
  if (targets.cols() == 0) throw EmptyBatchError("eval_loss on an empty set");
  Rng rng = make_rng(seed);
  std::uniform_int_distribution<int> pick_t(1, schedule.T);
  const Matrix x0 = target_norm.apply(targets);
  Matrix latents(x0.rows(), x0.cols());
  Matrix eps(x0.rows(), x0.cols());
  std::vector<int> ts(static_cast<std::size_t>(x0.cols()));
  for (Eigen::Index j = 0; j < x0.cols(); ++j) {
    const int t = pick_t(rng);
    ts[static_cast<std::size_t>(j)] = t;
    for (Eigen::Index i = 0; i < x0.rows(); ++i) eps(i, j) = standard_normal(rng);
    latents.col(j) = schedule.alpha[static_cast<std::size_t>(t)] * x0.col(j) + schedule.sigma[static_cast<std::size_t>(t)] * eps.col(j);
  }
  const Matrix pred = predict_eps(latents, cond_norm.apply(conds), ts);
  return (pred - eps).colwise().squaredNorm().mean();
}

CondDiffusionModel train_cond_diffusion(const Matrix& targets, const Matrix& conds, DiffusionRole role,
                                        const DiffusionConfig& config, std::uint64_t seed, nn::TrainHistory* history) {
  if (targets.cols() == 0) throw EmptyBatchError("diffusion training set is empty");
  if (targets.cols() != conds.cols()) throw ShapeError("targets and conditions differ in sample count");
  CondDiffusionModel model;
  model.role = role;
  model.schedule = make_schedule(config.T, config.beta_start, config.beta_end);
  model.embed_dim = config.embed_dim;
  model.target_norm = nn::Standardizer::fit(targets);
  model.cond_norm = nn::Standardizer::fit(conds);
  const int d = static_cast<int>(targets.rows());
  const int c = static_cast<int>(conds.rows());
  model.eps_net = nn::mlp_init(nn::MlpSpec{d + c + config.embed_dim, config.hidden_dims, d}, seed);

  const Matrix x0 = model.target_norm.apply(targets);
  const Matrix cn = model.cond_norm.apply(conds);
  const auto& sched = model.schedule;
  std::uniform_int_distribution<int> pick_t(1, sched.T);
  Rng rng = make_rng(derive_seed(seed, "order"));
  auto h = nn::train_regression(
      model.eps_net, static_cast<std::size_t>(x0.cols()), config.train, rng,
      [&](std::span<const std::size_t> idx, Rng& r, Matrix& in, Matrix& out) {
        const auto b = static_cast<Eigen::Index>(idx.size());
        in.resize(d + c + config.embed_dim, b);
        out.resize(d, b);
        for (Eigen::Index j = 0; j < b; ++j) {
          const auto src = static_cast<Eigen::Index>(idx[static_cast<std::size_t>(j)]);
          const int t = pick_t(r);
          for (int i = 0; i < d; ++i) out(i, j) = standard_normal(r);
          const auto ti = static_cast<std::size_t>(t);
          in.col(j).head(d) = sched.alpha[ti] * x0.col(src) + sched.sigma[ti] * out.col(j);
          in.col(j).segment(d, c) = cn.col(src);
          in.col(j).tail(config.embed_dim) = timestep_embedding(t, config.embed_dim);
        }
      });
  if (history) *history = std::move(h);
  return model;
}

namespace {

// One ancestral update of `latents` (standardized) at step t for every column.
void ancestral_update(const CondDiffusionModel& model, Matrix& latents, const Matrix& conds_std, int t,
                      std::span<Rng*> rngs) {
  const auto& s = model.schedule;
  const auto ti = static_cast<std::size_t>(t);
  std::vector<int> ts(static_cast<std::size_t>(latents.cols()), t);
  const Matrix eps_hat = model.predict_eps(latents, conds_std, ts);
  const double beta = s.beta[ti];
  latents = (latents - (beta / s.sigma[ti]) * eps_hat) / std::sqrt(1.0 - beta);
  if (t > 1) {
    const double noise_scale = std::sqrt(s.posterior_var[ti]);
    for (Eigen::Index j = 0; j < latents.cols(); ++j) {
      for (Eigen::Index i = 0; i < latents.rows(); ++i) latents(i, j) += noise_scale * standard_normal(*rngs[static_cast<std::size_t>(j)]);
    }
  }
}

}  // namespace

Vector reverse_step(const CondDiffusionModel& model, const Vector& latent, const Vector& cond, int t, Rng& rng) {
  if (t < 1 || t > model.schedule.T) throw ShapeError("reverse_step timestep outside [1, T]");
  Matrix x = latent;
  Rng* rp = &rng;
  ancestral_update(model, x, model.cond_norm.apply(cond), t, std::span<Rng*>(&rp, 1));
  return x.col(0);
}

Matrix restore_batch(const CondDiffusionModel& model, const Matrix& noisy, const Matrix& conds,
                     std::span<const int> t_start, std::span<const std::uint64_t> sample_seeds, RestoreInit init) {
  const auto n = static_cast<std::size_t>(noisy.cols());
  if (conds.cols() != noisy.cols() || t_start.size() != n || sample_seeds.size() != n) {
    throw ShapeError("restore batch arguments differ in sample count");
  }
  if (noisy.rows() != model.target_dim() || conds.rows() != model.cond_dim()) {
    throw ShapeError("restore batch dimension mismatch");
  }
  const auto& s = model.schedule;
  std::vector<Rng> rngs;
  rngs.reserve(n);
  for (auto seed : sample_seeds) rngs.push_back(make_rng(seed));

  Matrix latents = model.target_norm.apply(noisy);
  const Matrix cn = model.cond_norm.apply(conds);
  int t_max = 0;
  for (std::size_t j = 0; j < n; ++j) {
    const int t0 = t_start[j];
    if (t0 < 0 || t0 > s.T) throw ShapeError("restore start step outside [0, T]");
    t_max = std::max(t_max, t0);
    const auto col = static_cast<Eigen::Index>(j);
    if (init == RestoreInit::Gaussian && t0 > 0) {
      for (Eigen::Index i = 0; i < latents.rows(); ++i) latents(i, col) = standard_normal(rngs[j]);
    } else {
      latents.col(col) *= s.alpha[static_cast<std::size_t>(t0)];
    }
  }

  std::vector<std::size_t> active;
  std::vector<Rng*> active_rngs;
  Matrix x, c;
  for (int t = t_max; t >= 1; --t) {
    active.clear();
    active_rngs.clear();
    for (std::size_t j = 0; j < n; ++j) {
      if (t_start[j] >= t) {
        active.push_back(j);
        active_rngs.push_back(&rngs[j]);
      }
    }
    nn::gather_columns(latents, active, x);
    nn::gather_columns(cn, active, c);
    ancestral_update(model, x, c, t, active_rngs);
    for (std::size_t k = 0; k < active.size(); ++k) latents.col(static_cast<Eigen::Index>(active[k])) = x.col(static_cast<Eigen::Index>(k));
  }

  Matrix out = model.target_norm.invert(latents);
  for (std::size_t j = 0; j < n; ++j) {
    if (t_start[j] == 0) out.col(static_cast<Eigen::Index>(j)) = noisy.col(static_cast<Eigen::Index>(j));
  }
  return out;
}

Vector restore(const CondDiffusionModel& model, const Vector& noisy, const Vector& cond, int t_start, std::uint64_t seed,
               RestoreInit init) {
  const int ts[1] = {t_start};
  const std::uint64_t seeds[1] = {seed};
  return restore_batch(model, noisy, cond, ts, seeds, init).col(0);
}

nn::Checkpoint to_checkpoint(const CondDiffusionModel& model) {
  nn::Checkpoint ckpt;
  ckpt.role = role_tag(model.role);
  ckpt.model = model.eps_net;
  ckpt.attributes = {
      {"embed_dim", std::to_string(model.embed_dim)},
      {"target_mean", detail::encode_vector(model.target_norm.mean)},
      {"target_scale", detail::encode_vector(model.target_norm.scale)},
      {"cond_mean", detail::encode_vector(model.cond_norm.mean)},
      {"cond_scale", detail::encode_vector(model.cond_norm.scale)},
  };
  return ckpt;
}

CondDiffusionModel diffusion_from_checkpoint(const nn::Checkpoint& ckpt, const DiffusionSchedule& schedule) {
  CondDiffusionModel m;
  if (ckpt.role == "theta_s") {
    m.role = DiffusionRole::StateModel;
  } else if (ckpt.role == "theta_a") {
    m.role = DiffusionRole::ActionModel;
  } else {
    throw FormatError("checkpoint role '" + ckpt.role + "' is not a diffusion model");
  }
  try {
    m.eps_net = ckpt.model;
    m.schedule = schedule;
    m.embed_dim = std::stoi(ckpt.attributes.at("embed_dim"));
    m.target_norm = {detail::decode_vector(ckpt.attributes.at("target_mean")),
                     detail::decode_vector(ckpt.attributes.at("target_scale"))};
    m.cond_norm = {detail::decode_vector(ckpt.attributes.at("cond_mean")),
                   detail::decode_vector(ckpt.attributes.at("cond_scale"))};
  } catch (const std::out_of_range&) {
    throw FormatError("diffusion checkpoint lacks normalization attributes");
  }
  if (m.eps_net.spec.input_dim != m.target_dim() + m.cond_dim() + m.embed_dim) {
    throw FormatError("diffusion checkpoint input dim disagrees with its attributes");
  }
  return m;
}

}  // namespace demoforge
