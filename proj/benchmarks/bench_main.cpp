#include <benchmark/benchmark.h>

#include <numeric>

#include "demoforge/diffusion/cond_diffusion.hpp"
#include "demoforge/filtering/lof.hpp"
#include "demoforge/nn/mlp.hpp"
#include "demoforge/rng.hpp"

namespace {

using demoforge::nn::Matrix;

Matrix random_matrix(int rows, int cols, std::uint64_t seed) {
  auto rng = demoforge::make_rng(seed);
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = demoforge::standard_normal(rng);
  return m;
}

void BM_MlpGrad(benchmark::State& state) {
  const int width = static_cast<int>(state.range(0));
  const demoforge::nn::MlpSpec spec{.input_dim = 24, .hidden_dims = {width, width, width, width}, .output_dim = 4};
  const auto model = demoforge::nn::mlp_init(spec, 1);
  const Matrix x = random_matrix(24, 128, 2);
  const Matrix y = random_matrix(4, 128, 3);
  for (auto _ : state) benchmark::DoNotOptimize(demoforge::nn::mlp_grad(model, x, y));
  state.SetItemsProcessed(state.iterations() * 128);
}
BENCHMARK(BM_MlpGrad)->Arg(64)->Arg(256);

void BM_Lof(benchmark::State& state) {
  const Matrix features = random_matrix(8, static_cast<int>(state.range(0)), 4);
  for (auto _ : state) benchmark::DoNotOptimize(demoforge::lof_scores(features, {.k = 50}));
}
BENCHMARK(BM_Lof)->Arg(1000)->Arg(5000)->Unit(benchmark::kMillisecond);

void BM_RestoreBatch(benchmark::State& state) {
  demoforge::DiffusionConfig cfg;
  cfg.hidden_dims = {256, 256, 256, 256};
  cfg.train.epochs = 0;
  const Matrix targets = random_matrix(4, 256, 5);
  const Matrix conds = random_matrix(2, 256, 6);
  const auto model = demoforge::train_cond_diffusion(targets, conds, demoforge::DiffusionRole::StateModel, cfg, 7);
  const int t_start = static_cast<int>(state.range(0));
  std::vector<int> starts(256, t_start);
  std::vector<std::uint64_t> seeds(256);
  std::iota(seeds.begin(), seeds.end(), 0);
  for (auto _ : state) benchmark::DoNotOptimize(demoforge::restore_batch(model, targets, conds, starts, seeds));
  state.SetItemsProcessed(state.iterations() * 256);
}
BENCHMARK(BM_RestoreBatch)->Arg(20)->Arg(100)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
