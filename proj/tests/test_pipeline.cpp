#include <algorithm>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <set>

#include "doctest.h"
#include "demoforge/error.hpp"
#include "demoforge/pipeline/config.hpp"
#include "demoforge/pipeline/dmdr.hpp"
#include "demoforge/pipeline/experiment.hpp"
#include "demoforge/pipeline/policy.hpp"
#include "support/profiles.hpp"

using namespace demoforge;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("demoforge_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

}  // namespace

TEST_CASE("empty config yields the documented defaults") {
  const auto c = parse_config_text("");
  CHECK(c.noise.p == 0.2);
  CHECK(c.noise.sigma == doctest::Approx(1.0 / 6.0));
  CHECK(c.diffusion.T == 100);
  CHECK(c.gate.t_thres == 20);
  CHECK(c.gate.fixed_t == 50);
  CHECK(c.filter.trusted_fraction == 0.5);
  CHECK(c.filter.lof.k == 50);
  CHECK(c.policy.train.batch_size == 128);
  CHECK(c.diffusion.train.batch_size == 128);
  CHECK(c.eval_episodes == 100);
  CHECK(c.eval_seeds == 5);
}

TEST_CASE("sections, comments and overrides") {
  const auto c = parse_config_text("# comment\n[noise]\nfamily = laplacian\np = 0.4  # trailing\n\n[restore]\nt_thres=5\n");
  CHECK(c.noise.family == NoiseFamily::Laplacian);
  CHECK(c.noise.p == 0.4);
  CHECK(c.gate.t_thres == 5);
  RunConfig d;
  apply_override(d, "train.batch_size", "64");
  CHECK(d.filter.autoencoder.train.batch_size == 64);
  CHECK(d.predictor.train.batch_size == 64);
}

TEST_CASE("config errors name the field and line") {
  RunConfig c;
  try {
    apply_override(c, "noise.p", "1.5");
    FAIL("expected a range error");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("noise.p") != std::string::npos);
  }
  CHECK_THROWS_AS(apply_override(c, "noise.pp", "0.1"), ConfigError);
  CHECK_THROWS_AS(apply_override(c, "diffusion.T", "ten"), ConfigError);
  CHECK_THROWS_AS(apply_override(c, "diffusion.embed_dim", "15"), ConfigError);
  try {
    parse_config_text("[noise]\np = 0.2\nsigma\n", "cfg.txt");
    FAIL("expected a syntax error");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("cfg.txt:3") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_config_text("restore.fixed_t = 150\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("diffusion.beta_start = 0.5\ndiffusion.beta_end = 0.2\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("/nonexistent/demoforge.cfg"), IoError);
}

TEST_CASE("config text round trip is lossless") {
  RunConfig c;
  apply_override(c, "noise.family", "laplacian");
  apply_override(c, "noise.sigma", "0.123456789012345");
  apply_override(c, "diffusion.hidden", "64,32");
  apply_override(c, "env.expert_gain", "2.5");
  apply_override(c, "policy.strategy", "split");
  const auto back = parse_config_text(to_config_text(c));
  CHECK(to_config_text(back) == to_config_text(c));
  CHECK(config_hash(back) == config_hash(c));
  CHECK(back.noise.sigma == c.noise.sigma);
  CHECK(config_entries(c).size() == config_keys().size());
}

TEST_CASE("member training sets per strategy") {
  const auto split = member_training_sets(103, EnsembleStrategy::Split, 5, 1);
  REQUIRE(split.size() == 5);
  std::vector<std::size_t> all;
  for (const auto& s : split) {
    CHECK(s.size() >= 20);
    all.insert(all.end(), s.begin(), s.end());
  }
  std::sort(all.begin(), all.end());
  std::vector<std::size_t> expected(103);
  std::iota(expected.begin(), expected.end(), 0);
  CHECK(all == expected);
  const auto boot = member_training_sets(50, EnsembleStrategy::SampleWithReplacement, 3, 1);
  CHECK(boot[0].size() == 50);
  CHECK(std::set<std::size_t>(boot[0].begin(), boot[0].end()).size() < 50);
  const auto shuf = member_training_sets(10, EnsembleStrategy::Shuffle, 2, 1);
  CHECK(shuf[0].size() == 10);
  CHECK_THROWS_AS(member_training_sets(3, EnsembleStrategy::Split, 5, 1), ConfigError);
}

TEST_CASE("ensemble of one equals its member; mean aggregation averages") {
  const auto demos = gen_expert_demos(ToyEnv::point_reach(), 300, 1);
  PolicyConfig cfg{.hidden_dims = {16, 16}, .train = {.epochs = 2}};
  const auto single = train_bc(demos, EnsembleStrategy::Shuffle, 1, cfg, 3);
  CHECK(single.predict(demos.states()) == nn::mlp_forward_batch(single.members[0], demos.states()));
  const auto ens = train_bc(demos, EnsembleStrategy::Shuffle, 3, cfg, 3);
  REQUIRE(ens.size() == 3);
  Matrix mean = Matrix::Zero(2, static_cast<Eigen::Index>(demos.size()));
  for (const auto& m : ens.members) mean += nn::mlp_forward_batch(m, demos.states());
  CHECK(ens.predict(demos.states()).isApprox(mean / 3.0, 1e-12));
  CHECK(ens.members[0].weights[0] != ens.members[1].weights[0]);
}

TEST_CASE("expert wrapped as a bundle reaches full success; evaluation is deterministic") {
  const auto env = ToyEnv::point_reach();
  // A linear policy a = goal - agent equals the K=1 expert wherever the clamp is inactive;
  // clamping happens inside the env, so this is exactly the expert.
  Matrix w(2, 4);
  w << -1, 0, 1, 0, 0, -1, 0, 1;
  PolicyBundle b;
  b.members.push_back(nn::MlpModel::from_parameters({.input_dim = 4, .hidden_dims = {}, .output_dim = 2}, {w},
                                                    {Vector::Zero(2)}));
  const auto t1 = evaluate(b, env, 20, 3, 9);
  CHECK(t1.mean == 1.0);
  CHECK(t1.per_seed.size() == 3);
  CHECK(evaluate(b, env, 20, 3, 9).per_seed == t1.per_seed);
}

TEST_CASE("tiny pipeline: accounting, determinism and artifacts") {
  const auto cfg = profiles::tiny();
  const auto a = run_dmdr(cfg);
  const auto& f = a.filter.result;
  const auto& r = a.restored.report;
  const std::size_t n = a.noisy.size();
  CHECK(r.final_size + f.subset(Subset::NoisyPair).size() == n);
  CHECK(r.final_size == f.subset(Subset::CleanPair).size() + f.subset(Subset::CleanStateNoisyAction).size() +
                            f.subset(Subset::NoisyStateCleanAction).size());
  CHECK(a.restored.dataset.size() == r.final_size);
  const auto& ns = r.subsets[static_cast<std::size_t>(Subset::NoisyStateCleanAction)];
  CHECK(ns.passed + ns.restored == ns.size);
  CHECK(r.subsets[static_cast<std::size_t>(Subset::NoisyPair)].discarded ==
        f.subset(Subset::NoisyPair).size());
  const auto b = run_dmdr(cfg);
  CHECK(b.restored.dataset.states() == a.restored.dataset.states());
  CHECK(b.restored.dataset.actions() == a.restored.dataset.actions());

  const auto dir = scratch("tiny_pipeline");
  save_artifacts(dir, a);
  for (const char* name : {"demos_clean.dfd", "demos_noisy.dfd", "demos_restored.dfd", "filter.json",
                           "schedule.json", "restore_report.json", "checkpoints/theta_s", "checkpoints/psi_a",
                           "checkpoints/phi_s"}) {
    CAPTURE(name);
    CHECK(fs::exists(dir / name));
  }
  fs::remove_all(dir);
}

TEST_CASE("p=0 runs end to end") {
  auto cfg = profiles::tiny();
  cfg.noise.p = 0.0;
  const auto a = run_dmdr(cfg);
  CHECK(a.restored.report.final_size + a.filter.result.subset(Subset::NoisyPair).size() == a.noisy.size());
  CHECK(a.restored.dataset.size() == a.restored.report.final_size);
}

TEST_CASE("experiment rows, results.csv and manifest round trip") {
  auto cfg = profiles::tiny(EnvKind::LineTracker);
  apply_override(cfg, "noise.family", "laplacian");
  const auto run = run_experiment(cfg, "base");
  const auto dir = scratch("tiny_experiment");
  save_experiment(dir, cfg, run);
  const auto rows = read_results_csv(dir / "results.csv");
  REQUIRE(rows.size() == run.rows.size());
  CHECK(rows[0].value == run.rows[0].value);
  CHECK(std::count_if(rows.begin(), rows.end(), [](const ResultRow& r) { return r.metric == "bc.return"; }) == 2);
  const auto back = load_manifest_config(dir / "run_manifest.json");
  CHECK(back.noise.family == NoiseFamily::Laplacian);
  CHECK(config_hash(back) == config_hash(cfg));
  CHECK(fs::exists(dir / "summary.json"));
  CHECK(fs::exists(dir / "policy" / "member_0"));
  CHECK(fs::exists(dir / "policy_bc" / "member_0"));
  fs::remove_all(dir);
}

TEST_CASE("ablation settings cover the axes") {
  const RunConfig base;
  CHECK(ablation_settings(base, AblationAxis::TrustedFraction).size() == 7);
  CHECK(ablation_settings(base, AblationAxis::NoiseType).size() == 7);
  const auto levels = ablation_settings(base, AblationAxis::NoiseLevel);
  REQUIRE(levels.size() == 2);
  CHECK(levels[0].second.noise.p == 0.2);
  CHECK(levels[1].second.noise.p == 0.4);
  CHECK(ablation_settings(base, AblationAxis::RestoreVariant).size() == 4);
  CHECK(ablation_settings(base, AblationAxis::FilterVariant).size() == 4);
  for (auto axis : {AblationAxis::FilterVariant, AblationAxis::RestoreVariant, AblationAxis::TrustedFraction,
                    AblationAxis::NoiseType, AblationAxis::NoiseLevel, AblationAxis::EnsembleStrategy}) {
    CHECK(ablation_axis_from_string(to_string(axis)) == axis);
    for (const auto& [label, cfg] : ablation_settings(base, axis)) CHECK(label.find('=') != std::string::npos);
  }
}

TEST_CASE("ablation suite shares a pipeline run across restore variants") {
  const auto rows = ablation_suite(profiles::tiny(), AblationAxis::RestoreVariant);
  std::set<std::string> settings;
  for (const auto& r : rows) settings.insert(r.setting);
  CHECK(settings.size() == 4);
  // Same filter for every variant, so filter precision rows agree.
  std::set<double> precisions;
  for (const auto& r : rows) {
    if (r.metric == "filter.state_precision") precisions.insert(r.value);
  }
  CHECK(precisions.size() == 1);
}

TEST_CASE("stage errors keep the stage and kind") {
  auto cfg = profiles::tiny();
  cfg.dataset_size = 0;
  try {
    run_dmdr(cfg);
    FAIL("expected a stage error");
  } catch (const StageError& e) {
    CHECK(std::string(e.what()).rfind(to_string(e.stage()) + ":", 0) == 0);
  }
}

TEST_CASE("shipped config files match the test profiles") {
  const fs::path configs = DEMOFORGE_SOURCE_DIR "/configs";
  CHECK(to_config_text(parse_config(configs / "ci.cfg")) == to_config_text(profiles::ci(EnvKind::PointReach, 0)));
  CHECK(to_config_text(parse_config(configs / "quick.cfg")) == to_config_text(profiles::tiny()));
}
