#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numeric>

#include "doctest.h"
#include "demoforge/demos/demo_set.hpp"
#include "demoforge/demos/envs.hpp"
#include "demoforge/error.hpp"
#include "demoforge/filtering/autoencoder.hpp"
#include "demoforge/filtering/filter.hpp"
#include "demoforge/filtering/lof.hpp"
#include "demoforge/rng.hpp"
#include "support/oracles.hpp"
#include "support/synthetic.hpp"

using namespace demoforge;

TEST_CASE("LOF hand case {0,1,2,10}, k=2") {
  Matrix pts(1, 4);
  pts << 0, 1, 2, 10;
  const auto lof = lof_scores(pts, {.k = 2});
  // k-distances {2,1,2,9}; lrd {2/3, 1/2, 2/3, 2/17}.
  CHECK(lof(0) == doctest::Approx(0.875));
  CHECK(lof(1) == doctest::Approx(4.0 / 3.0));
  CHECK(lof(2) == doctest::Approx(0.875));
  CHECK(lof(3) == doctest::Approx(4.958333333333));
  CHECK(lof(3) > 1.5);
  const auto ref = oracle::brute_force_lof(pts, 2);
  for (int i = 0; i < 4; ++i) CHECK(std::abs(lof(i) - ref[static_cast<std::size_t>(i)]) < 1e-9);
}

TEST_CASE("LOF matches the brute-force oracle on random sets") {
  for (std::uint64_t c = 0; c < 10; ++c) {
    auto rng = make_rng(c);
    const int n = 20 + static_cast<int>(c) * 15;
    const int k = 3 + static_cast<int>(c % 5);
    Matrix pts(3, n);
    for (Eigen::Index i = 0; i < pts.size(); ++i) pts.data()[i] = standard_normal(rng);
    const auto lof = lof_scores(pts, {.k = k});
    const auto ref = oracle::brute_force_lof(pts, k);
    for (int i = 0; i < n; ++i) CHECK(std::abs(lof(i) - ref[static_cast<std::size_t>(i)]) < 1e-9);
  }
}

TEST_CASE("LOF handles ties at the k-distance") {
  Matrix pts(1, 6);
  pts << 0, 1, -1, 2, -2, 7;
  const auto lof = lof_scores(pts, {.k = 2});
  const auto ref = oracle::brute_force_lof(pts, 2);
  for (int i = 0; i < 6; ++i) CHECK(std::abs(lof(i) - ref[static_cast<std::size_t>(i)]) < 1e-9);
}

TEST_CASE("identical points all score 1") {
  const Matrix pts = Matrix::Constant(2, 10, 0.5);
  const auto lof = lof_scores(pts, {.k = 3});
  for (int i = 0; i < 10; ++i) CHECK(lof(i) == doctest::Approx(1.0));
}

TEST_CASE("planted far points rank at the top") {
  auto rng = make_rng(3);
  Matrix pts(2, 510);
  for (Eigen::Index i = 0; i < pts.size(); ++i) pts.data()[i] = standard_normal(rng);
  for (int j = 500; j < 510; ++j) {
    const double angle = 2.0 * M_PI * (j - 500) / 10.0;
    pts(0, j) = 10.0 * std::cos(angle);
    pts(1, j) = 10.0 * std::sin(angle);
  }
  const auto lof = lof_scores(pts, {.k = 20});
  std::vector<int> order(510);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) { return lof(a) > lof(b); });
  for (int r = 0; r < 10; ++r) CHECK(order[static_cast<std::size_t>(r)] >= 500);
}

TEST_CASE("LOF rejects invalid neighbor counts") {
  const Matrix pts = Matrix::Random(2, 5);
  CHECK_THROWS_AS(lof_scores(pts, {.k = 0}), ConfigError);
  CHECK_THROWS_AS(lof_scores(pts, {.k = 5}), ConfigError);
  CHECK(effective_neighbor_count(50, 10000) == 50);
  CHECK(effective_neighbor_count(50, 200) == 10);
  CHECK(effective_neighbor_count(50, 4) == 3);
}

TEST_CASE("rank labels count ceil(tau N) and break ties by index") {
  Vector scores(10);
  scores << 5, 1, 9, 3, 7, 2, 8, 4, 6, 0;
  const auto labels = rank_labels(scores, 0.5);
  CHECK(std::accumulate(labels.begin(), labels.end(), 0) == 5);
  CHECK(labels[9] == 1);
  CHECK(labels[2] == 0);
  const auto tied = rank_labels(Vector::Ones(5), 0.5);
  CHECK(tied == std::vector<std::uint8_t>{1, 1, 1, 0, 0});
}

TEST_CASE("four subsets partition every pair") {
  const std::vector<std::uint8_t> s = {1, 1, 0, 0, 1};
  const std::vector<std::uint8_t> a = {1, 0, 1, 0, 1};
  const auto parts = assemble_subsets(s, a);
  CHECK(parts[0] == std::vector<std::size_t>{0, 4});
  CHECK(parts[1] == std::vector<std::size_t>{1});
  CHECK(parts[2] == std::vector<std::size_t>{2});
  CHECK(parts[3] == std::vector<std::size_t>{3});
  CHECK_THROWS_AS(partition(Vector::Zero(3), Vector::Zero(4), 0.5), ConfigError);
  CHECK_THROWS_AS(partition(Vector::Zero(3), Vector::Zero(3), 1.0), ConfigError);
}

TEST_CASE("precision counts unmasked entries among labeled clean") {
  CHECK(clean_set_precision({1, 1, 0, 1}, {0, 1, 1, 0}) == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("autoencoder memorizes a single repeated vector") {
  Matrix x(3, 64);
  for (int j = 0; j < 64; ++j) x.col(j) << 0.2, -0.4, 0.9;
  AutoencoderConfig cfg{.hidden_dims = {16, 4, 16}, .train = {.epochs = 200, .batch_size = 32, .learning_rate = 1e-3}};
  const auto ae = train_autoencoder(x, cfg, 1);
  CHECK(ae.reconstruction_error(x.leftCols(1))(0) < 1e-4);
}

TEST_CASE("autoencoder features are pure and sized by the bottleneck") {
  const auto data = synthetic::manifold_with_outliers(300, 0.2, 1);
  AutoencoderConfig cfg{.hidden_dims = {32, 3, 32}, .train = {.epochs = 0}};
  const auto ae = train_autoencoder(data.values, cfg, 2);
  const Matrix z = ae.encode(data.values);
  CHECK(z.rows() == 3);
  CHECK(z.cols() == 300);
  CHECK(ae.encode(data.values) == z);
  CHECK(bottleneck_index({128, 64, 8, 64, 128}) == 2);
}

TEST_CASE("reconstruction error separates corrupted samples") {
  const auto data = synthetic::manifold_with_outliers(1000, 0.2, 4);
  AutoencoderConfig cfg{.hidden_dims = {64, 64, 2, 64, 64}, .train = {.epochs = 400, .batch_size = 64, .learning_rate = 1e-3}};
  const auto ae = train_autoencoder(data.values, cfg, 5);
  const Vector err = ae.reconstruction_error(data.values);
  CHECK(synthetic::auroc(err, data.corrupted) > 0.8);
}

TEST_CASE("autoencoder checkpoint round trip") {
  const auto data = synthetic::manifold_with_outliers(50, 0.2, 1);
  const auto ae = train_autoencoder(data.values, {.hidden_dims = {8, 2, 8}, .train = {.epochs = 2}}, 3);
  const auto back = autoencoder_from_checkpoint(to_checkpoint(ae, "phi_s"));
  CHECK(back.encode(data.values) == ae.encode(data.values));
}

TEST_CASE("filter variants: seeded, shared autoencoders, rank-based even at p=0") {
  const auto clean = gen_expert_demos(ToyEnv::point_reach(), 400, 1);
  const auto noisy = corrupt(clean, {.p = 0.0, .seed = 1});
  FilterConfig cfg;
  cfg.autoencoder = {.hidden_dims = {16, 4, 16}, .train = {.epochs = 3}};
  cfg.variant = FilterVariant::Random;
  CHECK(filter_variant(noisy, cfg, 3).result.state_clean == filter_variant(noisy, cfg, 3).result.state_clean);
  cfg.variant = FilterVariant::AeLof;
  const auto lof = filter_variant(noisy, cfg, 3);
  cfg.variant = FilterVariant::AeOnly;
  const auto only = filter_variant(noisy, cfg, 3);
  REQUIRE(lof.autoencoders);
  REQUIRE(only.autoencoders);
  CHECK(lof.autoencoders->state.net.weights[0] == only.autoencoders->state.net.weights[0]);
  const auto n_clean = std::accumulate(lof.result.state_clean.begin(), lof.result.state_clean.end(), std::size_t{0});
  CHECK(n_clean == static_cast<std::size_t>(std::ceil(0.5 * static_cast<double>(noisy.size()))));
}

TEST_CASE("filter.json round trip") {
  Vector s(4), a(4);
  s << 0.1, 0.7, 1.0 / 3.0, 2.5;
  a << 3, 1, 2, 0;
  const auto r = partition(s, a, 0.5);
  const auto path = std::filesystem::temp_directory_path() / "demoforge_filter.json";
  save_filter_json(path, r);
  const auto back = load_filter_json(path);
  CHECK(back.state_scores == r.state_scores);
  CHECK(back.subsets == r.subsets);
  CHECK(back.action_clean == r.action_clean);
  std::filesystem::remove(path);
}
