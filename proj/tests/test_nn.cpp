#include <cmath>
#include <filesystem>

#include "doctest.h"
#include "demoforge/error.hpp"
#include "demoforge/nn/adam.hpp"
#include "demoforge/nn/checkpoint.hpp"
#include "demoforge/nn/mlp.hpp"
#include "demoforge/nn/standardizer.hpp"
#include "demoforge/nn/trainer.hpp"
#include "demoforge/rng.hpp"
#include "support/oracles.hpp"

using namespace demoforge;
using namespace demoforge::nn;

namespace {

Matrix gaussian(int rows, int cols, std::uint64_t seed) {
  auto rng = make_rng(seed);
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = standard_normal(rng);
  return m;
}

}  // namespace

TEST_CASE("hand-computed forward pass") {
  MlpSpec spec{.input_dim = 2, .hidden_dims = {2}, .output_dim = 1};
  Matrix w0(2, 2);
  w0 << 1, -1, 0.5, 2;
  Vector b0(2);
  b0 << 0, -1;
  Matrix w1(1, 2);
  w1 << 2, 3;
  Vector b1(1);
  b1 << 0.5;
  const auto m = MlpModel::from_parameters(spec, {w0, w1}, {b0, b1});
  Vector x(2);
  x << 1, 2;
  // h = relu([1-2, 0.5+4-1]) = [0, 3.5]; y = 0 + 10.5 + 0.5
  CHECK(mlp_forward(m, x)(0) == doctest::Approx(11.0));
}

TEST_CASE("Kaiming-uniform init respects the bound and zeroes biases") {
  const MlpSpec spec{.input_dim = 24, .hidden_dims = {64, 32}, .output_dim = 3};
  const auto m = mlp_init(spec, 9);
  for (std::size_t l = 0; l < m.weights.size(); ++l) {
    const double bound = std::sqrt(6.0 / static_cast<double>(m.weights[l].cols()));
    CHECK(m.weights[l].cwiseAbs().maxCoeff() <= bound);
    CHECK(m.weights[l].cwiseAbs().maxCoeff() > 0.8 * bound);
    CHECK(m.biases[l].isZero());
  }
  CHECK(m.weights[0].rows() == 64);
  CHECK(m.weights[0].cols() == 24);
  CHECK(spec.parameter_count() == 24 * 64 + 64 + 64 * 32 + 32 + 32 * 3 + 3);
}

TEST_CASE("init is deterministic and values are float-representable") {
  const MlpSpec spec{.input_dim = 5, .hidden_dims = {7}, .output_dim = 2};
  const auto a = mlp_init(spec, 3);
  const auto b = mlp_init(spec, 3);
  CHECK(a.weights[0] == b.weights[0]);
  for (Eigen::Index i = 0; i < a.weights[0].size(); ++i) {
    const double v = a.weights[0].data()[i];
    CHECK(v == static_cast<double>(static_cast<float>(v)));
  }
}

TEST_CASE("analytic gradient matches central differences") {
  for (std::uint64_t c = 0; c < 10; ++c) {
    const MlpSpec spec{.input_dim = 3, .hidden_dims = {6, 5}, .output_dim = 2};
    const auto m = mlp_init(spec, c);
    const Matrix x = gaussian(3, 8, 100 + c);
    const Matrix y = gaussian(2, 8, 200 + c);
    const auto analytic = oracle::flatten(mlp_grad(m, x, y).grads);
    const auto numeric = oracle::finite_difference_grad(m, x, y);
    CHECK(oracle::relative_error(analytic, numeric) < 1e-4);
    CHECK(oracle::max_coordinate_error(analytic, numeric) < 1e-4);
  }
}

TEST_CASE("mlp_loss agrees with the loss reported by mlp_grad") {
  const auto m = mlp_init({.input_dim = 2, .hidden_dims = {4}, .output_dim = 2}, 1);
  const Matrix x = gaussian(2, 5, 1), y = gaussian(2, 5, 2);
  CHECK(mlp_loss(m, x, y) == doctest::Approx(mlp_grad(m, x, y).loss).epsilon(1e-12));
}

TEST_CASE("Adam matches a scalar reference over several steps") {
  auto m = mlp_init({.input_dim = 1, .hidden_dims = {1}, .output_dim = 1}, 4);
  auto opt = adam_init(m, {.base_lr = 1e-2, .total_epochs = 1, .linear_decay = false});
  oracle::ScalarAdam ref{.lr = 1e-2};
  double p = m.weights[0](0, 0);
  const double grads[] = {0.3, -1.2, 0.05, 2.0, -0.7};
  for (double g : grads) {
    auto bundle = MlpGrads::zeros_like(m);
    bundle.weights[0](0, 0) = g;
    adam_step(m, bundle, opt, 0);
    p = ref.step(p, g);
    CHECK(m.weights[0](0, 0) == doctest::Approx(p).epsilon(1e-7));
  }
  CHECK(opt.step_count == 5);
}

TEST_CASE("linear learning-rate decay") {
  const auto m = mlp_init({.input_dim = 1, .hidden_dims = {1}, .output_dim = 1}, 0);
  const auto opt = adam_init(m, {.base_lr = 1e-3, .total_epochs = 10});
  CHECK(opt.learning_rate(0) == doctest::Approx(1e-3));
  CHECK(opt.learning_rate(5) == doctest::Approx(5e-4));
  CHECK(opt.learning_rate(10) == 0.0);
  CHECK_THROWS_AS(adam_init(m, {.base_lr = 0.0}), ConfigError);
}

TEST_CASE("Adam rejects mismatched gradients") {
  auto m = mlp_init({.input_dim = 2, .hidden_dims = {3}, .output_dim = 1}, 0);
  auto other = mlp_init({.input_dim = 2, .hidden_dims = {4}, .output_dim = 1}, 0);
  auto opt = adam_init(m, {});
  CHECK_THROWS_AS(adam_step(m, MlpGrads::zeros_like(other), opt, 0), ShapeError);
}

TEST_CASE("regression training reduces the loss") {
  const Matrix x = gaussian(2, 256, 5);
  Matrix y(1, 256);
  for (int i = 0; i < 256; ++i) y(0, i) = std::sin(x(0, i)) + 0.5 * x(1, i);
  auto m = mlp_init({.input_dim = 2, .hidden_dims = {32, 32}, .output_dim = 1}, 6);
  auto rng = make_rng(7);
  const auto hist = train_regression(m, x, y, {.epochs = 60, .batch_size = 32, .learning_rate = 3e-3}, rng);
  REQUIRE(hist.epoch_loss.size() == 60);
  CHECK(hist.epoch_loss.back() < 0.2 * hist.epoch_loss.front());
}

TEST_CASE("zero epochs leave the model unchanged") {
  auto m = mlp_init({.input_dim = 2, .hidden_dims = {4}, .output_dim = 1}, 6);
  const auto before = m.weights[0];
  auto rng = make_rng(1);
  train_regression(m, gaussian(2, 10, 1), gaussian(1, 10, 2), {.epochs = 0}, rng);
  CHECK(m.weights[0] == before);
}

TEST_CASE("non-finite loss raises a training error") {
  auto m = mlp_init({.input_dim = 1, .hidden_dims = {4}, .output_dim = 1}, 6);
  Matrix x = gaussian(1, 8, 1), y = gaussian(1, 8, 2);
  y(0, 3) = std::numeric_limits<double>::quiet_NaN();
  auto rng = make_rng(1);
  CHECK_THROWS_AS(train_regression(m, x, y, {.epochs = 2, .batch_size = 8}, rng), TrainingError);
}

TEST_CASE("standardizer round trip and constant columns") {
  Matrix x = gaussian(3, 50, 11);
  x.row(2).setConstant(4.0);
  const auto s = Standardizer::fit(x);
  CHECK(s.scale(2) == 1.0);
  const Matrix z = s.apply(x);
  CHECK(std::abs(z.row(0).mean()) < 1e-12);
  CHECK(s.invert(z).isApprox(x, 1e-12));
}

TEST_CASE("checkpoint round trip is bit exact") {
  const auto dir = std::filesystem::temp_directory_path() / "demoforge_test_ckpt";
  std::filesystem::remove_all(dir);
  const auto m = mlp_init({.input_dim = 3, .hidden_dims = {5, 4}, .output_dim = 2}, 12);
  save_checkpoint(dir, {"theta_s", m, {{"k", "v"}}});
  const auto back = load_checkpoint(dir);
  CHECK(back.role == "theta_s");
  CHECK(back.attributes.at("k") == "v");
  CHECK(back.model.spec == m.spec);
  for (std::size_t l = 0; l < m.weights.size(); ++l) {
    CHECK(back.model.weights[l] == m.weights[l]);
    CHECK(back.model.biases[l] == m.biases[l]);
  }
  CHECK(parameter_checksum(back.model) == parameter_checksum(m));
  std::filesystem::remove_all(dir);
}

TEST_CASE("checkpoint loader rejects missing directories") {
  CHECK_THROWS_AS(load_checkpoint("/nonexistent/demoforge"), Error);
}

TEST_CASE("empty batches are rejected") {
  const auto m = mlp_init({.input_dim = 2, .hidden_dims = {3}, .output_dim = 1}, 0);
  CHECK_THROWS_AS(mlp_grad(m, Matrix(2, 0), Matrix(1, 0)), EmptyBatchError);
}

TEST_CASE("invalid specs are rejected") {
  CHECK_THROWS_AS(mlp_init({.input_dim = 0, .hidden_dims = {4}, .output_dim = 1}, 0), InvalidSpecError);
  CHECK_THROWS_AS(mlp_init({.input_dim = 2, .hidden_dims = {}, .output_dim = 1}, 0), InvalidSpecError);
}

TEST_CASE("random 2-[3]-1 net matches a hand-rolled matrix multiply") {
  const auto m = mlp_init({.input_dim = 2, .hidden_dims = {3}, .output_dim = 1}, 21);
  const double x[2] = {0.5, -0.2};
  double out = m.biases[1](0);
  for (int j = 0; j < 3; ++j) {
    double h = m.biases[0](j);
    for (int i = 0; i < 2; ++i) h += m.weights[0](j, i) * x[i];
    out += m.weights[1](0, j) * std::max(0.0, h);
  }
  Vector xv(2);
  xv << x[0], x[1];
  CHECK(std::abs(mlp_forward(m, xv)(0) - out) < 1e-12);
}

TEST_CASE("scalar linear model: dL/dw = -4 at w=0 for the pair (1, 2)") {
  const auto m = MlpModel::from_parameters({.input_dim = 1, .hidden_dims = {}, .output_dim = 1},
                                           {Matrix::Zero(1, 1)}, {Vector::Zero(1)});
  const auto g = mlp_grad(m, Matrix::Constant(1, 1, 1.0), Matrix::Constant(1, 1, 2.0));
  CHECK(g.grads.weights[0](0, 0) == doctest::Approx(-4.0));
  CHECK(g.loss == doctest::Approx(4.0));
}

TEST_CASE("zero gradient at the MSE minimum") {
  const auto m = mlp_init({.input_dim = 2, .hidden_dims = {4}, .output_dim = 1}, 2);
  const Matrix x = gaussian(2, 6, 3);
  const auto g = mlp_grad(m, x, mlp_forward_batch(m, x));
  CHECK(g.grads.max_abs() == 0.0);
}

TEST_CASE("Adam fixed points and first-step size") {
  auto m = mlp_init({.input_dim = 1, .hidden_dims = {1}, .output_dim = 1}, 8);
  const double w0 = m.weights[0](0, 0);
  auto opt = adam_init(m, {.base_lr = 0.1, .total_epochs = 10});
  adam_step(m, MlpGrads::zeros_like(m), opt, 0);
  CHECK(m.weights[0](0, 0) == w0);

  auto g = MlpGrads::zeros_like(m);
  g.weights[0](0, 0) = 1.0;
  auto at_end = adam_init(m, {.base_lr = 0.1, .total_epochs = 10});
  adam_step(m, g, at_end, 10);
  CHECK(m.weights[0](0, 0) == w0);

  auto fresh = adam_init(m, {.base_lr = 0.1, .total_epochs = 10});
  adam_step(m, g, fresh, 0);
  oracle::ScalarAdam ref{.lr = 0.1};
  CHECK(m.weights[0](0, 0) == doctest::Approx(ref.step(w0, 1.0)).epsilon(1e-7));
  CHECK(w0 - m.weights[0](0, 0) == doctest::Approx(0.1).epsilon(1e-5));
}
