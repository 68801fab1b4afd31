#include "demoforge/nn/mlp.hpp"

#include <cmath>
#include <random>

#include "demoforge/error.hpp"
#include "demoforge/rng.hpp"

namespace demoforge::nn {

std::string to_string(Activation a) {
  switch (a) {
    case Activation::Relu:
      return "relu";
    case Activation::Identity:
      return "identity";
  }
  return "identity";
}

Activation activation_from_string(const std::string& s) {
  if (s == "relu") return Activation::Relu;
  if (s == "identity") return Activation::Identity;
  throw InvalidSpecError("unknown activation tag '" + s + "'");
}

std::vector<int> MlpSpec::widths() const {
  std::vector<int> w;
  w.reserve(hidden_dims.size() + 2);
  w.push_back(input_dim);
  w.insert(w.end(), hidden_dims.begin(), hidden_dims.end());
  w.push_back(output_dim);
  return w;
}

std::size_t MlpSpec::parameter_count() const {
  const auto w = widths();
  std::size_t n = 0;
  for (std::size_t i = 0; i + 1 < w.size(); ++i) {
    n += static_cast<std::size_t>(w[i + 1]) * static_cast<std::size_t>(w[i] + 1);
  }
  return n;
}

void validate(const MlpSpec& spec, bool allow_linear) {
  if (spec.input_dim <= 0 || spec.output_dim <= 0) {
    throw InvalidSpecError("input and output dims must be positive");
  }
  if (spec.hidden_dims.empty() && !allow_linear) {
    throw InvalidSpecError("hidden_dims must be non-empty");
  }
  for (int h : spec.hidden_dims) {
    if (h <= 0) throw InvalidSpecError("hidden dims must be positive");
  }
}

MlpModel MlpModel::from_parameters(MlpSpec spec, std::vector<Matrix> weights, std::vector<Vector> biases) {
  validate(spec, /*allow_linear=*/true);
  const auto w = spec.widths();
  if (weights.size() != spec.layer_count() || biases.size() != spec.layer_count()) {
    throw ShapeError("parameter list length does not match layer count");
  }
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (weights[i].rows() != w[i + 1] || weights[i].cols() != w[i] || biases[i].size() != w[i + 1]) {
      throw ShapeError("layer " + std::to_string(i) + " parameter shape mismatch");
    }
  }
  MlpModel m;
  m.spec = std::move(spec);
  m.weights = std::move(weights);
  m.biases = std::move(biases);
  return m;
}

MlpModel mlp_init(const MlpSpec& spec, std::uint64_t seed) {
  validate(spec);
  MlpModel m;
  m.spec = spec;
  m.init_seed = seed;
  Rng rng = make_rng(seed);
  const auto w = spec.widths();
  for (std::size_t i = 0; i + 1 < w.size(); ++i) {
    const int fan_in = w[i];
    const double bound = std::sqrt(6.0 / fan_in);
    std::uniform_real_distribution<double> dist(-bound, bound);
    Matrix weight(w[i + 1], fan_in);
    for (Eigen::Index r = 0; r < weight.rows(); ++r) {
      for (Eigen::Index c = 0; c < weight.cols(); ++c) {
        weight(r, c) = static_cast<float>(dist(rng));
      }
    }
    m.weights.push_back(std::move(weight));
    m.biases.push_back(Vector::Zero(w[i + 1]));
  }
  return m;
}

namespace {

void check_input(const MlpModel& model, Eigen::Index rows) {
  if (rows != model.spec.input_dim) {
    throw ShapeError("input dim " + std::to_string(rows) + " != model input dim " +
                     std::to_string(model.spec.input_dim));
  }
}

void apply_activation(Activation a, Matrix& z) {
  if (a == Activation::Relu) z = z.cwiseMax(0.0);
}

// Forward pass keeping every layer's post-activation output.
void forward_cached(const MlpModel& model, const Matrix& inputs, std::vector<Matrix>& acts) {
  const std::size_t layers = model.weights.size();
  acts.resize(layers + 1);
  acts[0] = inputs;
  for (std::size_t i = 0; i < layers; ++i) {
    acts[i + 1].noalias() = model.weights[i] * acts[i];
    acts[i + 1].colwise() += model.biases[i];
    apply_activation(i + 1 == layers ? model.spec.output_activation : model.spec.hidden_activation,
                     acts[i + 1]);
  }
}

}  // namespace

Matrix mlp_forward_batch(const MlpModel& model, const Matrix& inputs) {
  check_input(model, inputs.rows());
  Matrix x = inputs;
  const std::size_t layers = model.weights.size();
  for (std::size_t i = 0; i < layers; ++i) {
    Matrix z = model.weights[i] * x;
    z.colwise() += model.biases[i];
    apply_activation(i + 1 == layers ? model.spec.output_activation : model.spec.hidden_activation, z);
    x = std::move(z);
  }
  return x;
}

Vector mlp_forward(const MlpModel& model, const Vector& x) {
  check_input(model, x.size());
  return mlp_forward_batch(model, x);
}

Matrix mlp_hidden_preactivation(const MlpModel& model, const Matrix& inputs, std::size_t layer) {
  check_input(model, inputs.rows());
  if (layer >= model.spec.hidden_dims.size()) throw ShapeError("hidden layer index out of range");
  Matrix x = inputs;
  for (std::size_t i = 0; i <= layer; ++i) {
    Matrix z = model.weights[i] * x;
    z.colwise() += model.biases[i];
    if (i == layer) return z;
    apply_activation(model.spec.hidden_activation, z);
    x = std::move(z);
  }
  return x;
}

MlpGrads MlpGrads::zeros_like(const MlpModel& model) {
  MlpGrads g;
  for (std::size_t i = 0; i < model.weights.size(); ++i) {
    g.weights.push_back(Matrix::Zero(model.weights[i].rows(), model.weights[i].cols()));
    g.biases.push_back(Vector::Zero(model.biases[i].size()));
  }
  return g;
}

double MlpGrads::max_abs() const {
  double m = 0.0;
  for (const auto& w : weights) m = std::max(m, w.cwiseAbs().maxCoeff());
  for (const auto& b : biases) m = std::max(m, b.cwiseAbs().maxCoeff());
  return m;
}

LossAndGrads mlp_grad(const MlpModel& model, const Matrix& inputs, const Matrix& targets, Loss) {
  if (inputs.cols() == 0) throw EmptyBatchError("mlp_grad called with an empty batch");
  check_input(model, inputs.rows());
  if (targets.rows() != model.spec.output_dim || targets.cols() != inputs.cols()) {
    throw ShapeError("target shape does not match model output / batch size");
  }
  std::vector<Matrix> acts;
  forward_cached(model, inputs, acts);
  const std::size_t layers = model.weights.size();
  const double batch = static_cast<double>(inputs.cols());

  Matrix delta = acts[layers] - targets;
  LossAndGrads out;
  out.loss = delta.squaredNorm() / batch;
  delta *= 2.0 / batch;
  if (model.spec.output_activation == Activation::Relu) {
    delta = delta.cwiseProduct((acts[layers].array() > 0.0).cast<double>().matrix());
  }

  out.grads.weights.resize(layers);
  out.grads.biases.resize(layers);
  for (std::size_t i = layers; i-- > 0;) {
    out.grads.weights[i].noalias() = delta * acts[i].transpose();
    out.grads.biases[i] = delta.rowwise().sum();
    if (i > 0) {
      Matrix prev = model.weights[i].transpose() * delta;
      if (model.spec.hidden_activation == Activation::Relu) {
        prev = prev.cwiseProduct((acts[i].array() > 0.0).cast<double>().matrix());
      }
      delta = std::move(prev);
    }
  }
  return out;
}

double mlp_loss(const MlpModel& model, const Matrix& inputs, const Matrix& targets) {
  if (inputs.cols() == 0) throw EmptyBatchError("mlp_loss called with an empty batch");
  const Matrix out = mlp_forward_batch(model, inputs);
  if (targets.rows() != out.rows() || targets.cols() != out.cols()) {
    throw ShapeError("target shape does not match model output / batch size");
  }
  return (out - targets).squaredNorm() / static_cast<double>(inputs.cols());
}

void round_to_float(MlpModel& model) {
  auto round = [](double v) { return static_cast<double>(static_cast<float>(v)); };
  for (auto& w : model.weights) w = w.unaryExpr(round);
  for (auto& b : model.biases) b = b.unaryExpr(round);
}

}  // namespace demoforge::nn
