#include "demoforge/nn/adam.hpp"

#include <algorithm>
#include <cmath>

#include "demoforge/error.hpp"

namespace demoforge::nn {

double OptimState::learning_rate(int epoch) const {
  if (!config.linear_decay) return config.base_lr;
  const double frac = static_cast<double>(epoch) / static_cast<double>(config.total_epochs);
  return std::max(0.0, config.base_lr * (1.0 - frac));
}

OptimState adam_init(const MlpModel& model, const AdamConfig& config) {
  if (config.base_lr <= 0.0) throw ConfigError("learning rate must be positive");
  if (config.total_epochs <= 0) throw ConfigError("total_epochs must be positive");
  OptimState s;
  s.config = config;
  s.first_moment = MlpGrads::zeros_like(model);
  s.second_moment = MlpGrads::zeros_like(model);
  return s;
}

namespace {

template <typename Param, typename Grad>
void update(Param& p, const Grad& g, Param& m, Param& v, const AdamConfig& c, double lr, double bc1,
            double bc2) {
  m = c.beta1 * m + (1.0 - c.beta1) * g;
  v = c.beta2 * v + (1.0 - c.beta2) * g.cwiseProduct(g);
  const double step = lr / bc1;
  const double eps = c.eps;
  p.array() -= step * m.array() / ((v.array() / bc2).sqrt() + eps);
  p = p.unaryExpr([](double x) { return static_cast<double>(static_cast<float>(x)); });
}

}  // namespace

void adam_step(MlpModel& model, const MlpGrads& grads, OptimState& opt, int epoch) {
  if (grads.weights.size() != model.weights.size() || grads.biases.size() != model.biases.size()) {
    throw ShapeError("gradient bundle does not match model");
  }
  for (std::size_t i = 0; i < model.weights.size(); ++i) {
    if (grads.weights[i].rows() != model.weights[i].rows() ||
        grads.weights[i].cols() != model.weights[i].cols() ||
        grads.biases[i].size() != model.biases[i].size()) {
      throw ShapeError("gradient shape mismatch at layer " + std::to_string(i));
    }
  }
  ++opt.step_count;
  const auto& c = opt.config;
  const double lr = opt.learning_rate(epoch);
  const double t = static_cast<double>(opt.step_count);
  const double bc1 = 1.0 - std::pow(c.beta1, t);
  const double bc2 = 1.0 - std::pow(c.beta2, t);
  for (std::size_t i = 0; i < model.weights.size(); ++i) {
    update(model.weights[i], grads.weights[i], opt.first_moment.weights[i], opt.second_moment.weights[i], c, lr,
           bc1, bc2);
    update(model.biases[i], grads.biases[i], opt.first_moment.biases[i], opt.second_moment.biases[i], c, lr, bc1,
           bc2);
  }
}

}  // namespace demoforge::nn
