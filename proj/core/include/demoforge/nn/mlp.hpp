#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace demoforge::nn {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

enum class Activation { Relu, Identity };

std::string to_string(Activation a);
Activation activation_from_string(const std::string& s);

struct MlpSpec {
  int input_dim = 1;
  std::vector<int> hidden_dims;
  int output_dim = 1;
  Activation hidden_activation = Activation::Relu;
  Activation output_activation = Activation::Identity;

  /// Layer widths including input and output: {in, h..., out}.
  std::vector<int> widths() const;
  std::size_t layer_count() const { return hidden_dims.size() + 1; }
  std::size_t parameter_count() const;

  bool operator==(const MlpSpec&) const = default;
};

/// Throws InvalidSpecError on non-positive dims. Empty hidden_dims is accepted
/// only when allow_linear is set (no pipeline model is linear).
void validate(const MlpSpec& spec, bool allow_linear = false);

/// Feedforward network. Parameters are held in double precision but every
/// value written by init or by an optimizer step is representable as a 32-bit
/// float, so checkpoints round-trip exactly.
struct MlpModel {
  MlpSpec spec;
  std::vector<Matrix> weights;  // weights[i]: out_i x in_i
  std::vector<Vector> biases;
  std::uint64_t init_seed = 0;

  /// Builds a model from explicit parameters; checks every shape.
  static MlpModel from_parameters(MlpSpec spec, std::vector<Matrix> weights,
                                  std::vector<Vector> biases);
};

/// Kaiming-uniform weights (bound sqrt(6 / fan_in)), zero biases.
MlpModel mlp_init(const MlpSpec& spec, std::uint64_t seed);

/// Single-sample forward pass.
Vector mlp_forward(const MlpModel& model, const Vector& x);

/// Batched forward pass; columns are samples.
Matrix mlp_forward_batch(const MlpModel& model, const Matrix& inputs);

/// Pre-activation output of hidden layer `layer` (0-based), batched.
Matrix mlp_hidden_preactivation(const MlpModel& model, const Matrix& inputs, std::size_t layer);

struct MlpGrads {
  std::vector<Matrix> weights;
  std::vector<Vector> biases;

  static MlpGrads zeros_like(const MlpModel& model);
  double max_abs() const;
};

enum class Loss { Mse };

struct LossAndGrads {
  double loss = 0.0;  // mean over batch of per-sample squared error sum
  MlpGrads grads;
};

/// Gradient of mean_b ||f(x_b) - y_b||^2 with respect to every parameter.
/// Columns of inputs/targets are samples.
LossAndGrads mlp_grad(const MlpModel& model, const Matrix& inputs, const Matrix& targets,
                      Loss loss = Loss::Mse);

/// Mean per-sample squared error without gradients.
double mlp_loss(const MlpModel& model, const Matrix& inputs, const Matrix& targets);

/// Rounds every parameter to the nearest 32-bit float.
void round_to_float(MlpModel& model);

}  // namespace demoforge::nn
