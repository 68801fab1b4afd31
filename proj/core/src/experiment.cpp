#include "demoforge/pipeline/experiment.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "binary_io.hpp"
#include "decimal.hpp"
#include "json.hpp"

namespace demoforge {

MetricTable evaluate(const PolicyBundle& bundle, const ToyEnv& env, int episodes, int seeds, std::uint64_t seed) {
  if (seeds < 1 || episodes < 1) throw ConfigError("evaluation needs at least one seed and one episode");
  MetricTable t;
  t.metric = env.metric();
  const auto policy = as_batch_policy(bundle);
  for (int s = 0; s < seeds; ++s) {
    t.per_seed.push_back(env_rollout(env, policy, episodes, derive_seed(seed, static_cast<std::uint64_t>(s))).mean);
  }
  for (double v : t.per_seed) t.mean += v;
  t.mean /= seeds;
  for (double v : t.per_seed) t.stddev += (v - t.mean) * (v - t.mean);
  t.stddev = std::sqrt(t.stddev / seeds);
  return t;
}

void write_results_csv(const std::filesystem::path& path, const std::vector<ResultRow>& rows) {
  std::string out = "setting,seed,metric,value\n";
  for (const auto& r : rows) {
    out += r.setting + "," + std::to_string(r.seed) + "," + r.metric + "," + detail::exact_decimal(r.value) + "\n";
  }
  detail::write_file(path, out);
}

std::vector<ResultRow> read_results_csv(const std::filesystem::path& path) {
  std::istringstream in(detail::read_file(path));
  std::string line;
  if (!std::getline(in, line) || line != "setting,seed,metric,value") {
    throw FormatError(path.string() + ": missing results header");
  }
  std::vector<ResultRow> rows;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != 4) throw FormatError(path.string() + ":" + std::to_string(line_no) + ": expected 4 fields");
    try {
      rows.push_back({cells[0], std::stoi(cells[1]), cells[2], std::stod(cells[3])});
    } catch (const std::exception&) {
      throw FormatError(path.string() + ":" + std::to_string(line_no) + ": malformed number");
    }
  }
  return rows;
}

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

PolicyBundle fit_policy(const DemoSet& data, const RunConfig& config, std::vector<StageTiming>& timings) {
  const auto t0 = std::chrono::steady_clock::now();
  auto bundle = in_stage(Stage::TrainPolicy, [&] {
    return train_bc(data, config.ensemble_strategy, config.ensemble_size, config.policy, stage_seed(config.seed, "policy"));
  });
  timings.push_back({to_string(Stage::TrainPolicy), seconds_since(t0)});
  return bundle;
}

void append_metric_rows(std::vector<ResultRow>& rows, const std::string& setting, const std::string& prefix,
                        const MetricTable& table) {
  for (std::size_t s = 0; s < table.per_seed.size(); ++s) {
    rows.push_back({setting, static_cast<int>(s), prefix + "." + to_string(table.metric), table.per_seed[s]});
  }
}

// Everything after restoration: BC on both data sets, evaluation, rows.
ExperimentRun finish(const RunConfig& config, const std::string& setting, DmdrArtifacts artifacts,
                     const PolicyBundle* cached_bc) {
  ExperimentRun run;
  run.artifacts = std::move(artifacts);
  auto& a = run.artifacts;
  run.bc_policy = cached_bc ? *cached_bc : fit_policy(a.noisy, config, a.timings);
  run.dmdr_policy = fit_policy(a.restored.dataset, config, a.timings);

  const auto t0 = std::chrono::steady_clock::now();
  const ToyEnv env = config.make_env();
  const auto eval_seed = stage_seed(config.seed, "eval");
  const auto bc = in_stage(Stage::Eval, [&] {
    return evaluate(run.bc_policy, env, config.eval_episodes, config.eval_seeds, eval_seed);
  });
  const auto dmdr = in_stage(Stage::Eval, [&] {
    return evaluate(run.dmdr_policy, env, config.eval_episodes, config.eval_seeds, eval_seed);
  });
  a.timings.push_back({to_string(Stage::Eval), seconds_since(t0)});

  append_metric_rows(run.rows, setting, "bc", bc);
  append_metric_rows(run.rows, setting, "dmdr", dmdr);
  if (a.noisy.has_masks()) {
    const auto& f = a.filter.result;
    run.rows.push_back({setting, 0, "filter.state_precision", clean_set_precision(f.state_clean, a.noisy.state_mask())});
    run.rows.push_back({setting, 0, "filter.action_precision", clean_set_precision(f.action_clean, a.noisy.action_mask())});
  }
  const auto& rep = a.restored.report;
  run.rows.push_back({setting, 0, "restore.final_size", static_cast<double>(rep.final_size)});
  const auto quality_rows = [&](const char* what, const std::optional<RestorationQuality>& q) {
    if (!q) return;
    run.rows.push_back({setting, 0, std::string("restore.") + what + "_mse_corrupted", q->corrupted_mse});
    run.rows.push_back({setting, 0, std::string("restore.") + what + "_mse_restored", q->restored_mse});
  };
  quality_rows("state", rep.state_quality);
  quality_rows("action", rep.action_quality);
  return run;
}

void save_policy(const std::filesystem::path& dir, const PolicyBundle& bundle) {
  for (std::size_t m = 0; m < bundle.size(); ++m) {
    nn::save_checkpoint(dir / ("member_" + std::to_string(m)),
                        {"policy", bundle.members[m], {{"strategy", to_string(bundle.strategy)}}});
  }
}

}  // namespace

ExperimentRun run_experiment(const RunConfig& config, const std::string& setting) {
  return finish(config, setting, run_dmdr(config), nullptr);
}

void save_experiment(const std::filesystem::path& dir, const RunConfig& config, const ExperimentRun& run) {
  save_artifacts(dir, run.artifacts);
  save_policy(dir / "policy", run.dmdr_policy);
  save_policy(dir / "policy_bc", run.bc_policy);
  write_results_csv(dir / "results.csv", run.rows);
  save_summary_json(dir / "summary.json", run.rows);
  auto checksums = component_checksums(run.artifacts);
  for (std::size_t m = 0; m < run.dmdr_policy.size(); ++m) {
    checksums.emplace_back("policy/member_" + std::to_string(m), nn::parameter_checksum(run.dmdr_policy.members[m]));
  }
  save_run_manifest(dir / "run_manifest.json", config, checksums, run.artifacts.timings);
}

std::string to_string(AblationAxis a) {
  switch (a) {
    case AblationAxis::FilterVariant: return "filter_variant";
    case AblationAxis::RestoreVariant: return "restore_variant";
    case AblationAxis::TrustedFraction: return "trusted_fraction";
    case AblationAxis::NoiseType: return "noise_type";
    case AblationAxis::NoiseLevel: return "noise_level";
    case AblationAxis::EnsembleStrategy: return "ensemble_strategy";
  }
  return "unknown";
}

AblationAxis ablation_axis_from_string(const std::string& s) {
  for (auto a : {AblationAxis::FilterVariant, AblationAxis::RestoreVariant, AblationAxis::TrustedFraction,
                 AblationAxis::NoiseType, AblationAxis::NoiseLevel, AblationAxis::EnsembleStrategy}) {
    if (to_string(a) == s) return a;
  }
  throw ConfigError("unknown ablation axis '" + s + "'");
}

std::vector<std::pair<std::string, RunConfig>> ablation_settings(const RunConfig& base, AblationAxis axis) {
  std::vector<std::pair<std::string, RunConfig>> out;
  const auto label = [&](const std::string& value) { return to_string(axis) + "=" + value; };
  switch (axis) {
    case AblationAxis::FilterVariant:
      for (auto v : {FilterVariant::Random, FilterVariant::AeOnly, FilterVariant::LofRaw, FilterVariant::AeLof}) {
        RunConfig c = base;
        c.filter.variant = v;
        out.emplace_back(label(to_string(v)), c);
      }
      break;
    case AblationAxis::RestoreVariant:
      for (auto v : {RestoreVariant::Full, RestoreVariant::NoThreshold, RestoreVariant::NoPredictor,
                     RestoreVariant::Generation}) {
        RunConfig c = base;
        c.gate.variant = v;
        out.emplace_back(label(to_string(v)), c);
      }
      break;
    case AblationAxis::TrustedFraction:
      for (int i = 3; i <= 9; ++i) {
        RunConfig c = base;
        c.filter.trusted_fraction = i / 10.0;
        out.emplace_back(label("0." + std::to_string(i)), c);
      }
      break;
    case AblationAxis::NoiseType:
      for (auto f : kAllNoiseFamilies) {
        RunConfig c = base;
        c.noise.family = f;
        out.emplace_back(label(to_string(f)), c);
      }
      break;
    case AblationAxis::NoiseLevel:
      for (const char* p : {"0.2", "0.4"}) {
        RunConfig c = base;
        c.noise.p = std::stod(p);
        out.emplace_back(label(p), c);
      }
      break;
    case AblationAxis::EnsembleStrategy: {
      const int n = std::max(base.ensemble_size, 5);
      RunConfig single = base;
      single.ensemble_strategy = EnsembleStrategy::Shuffle;
      single.ensemble_size = 1;
      out.emplace_back(label("single"), single);
      for (auto s : {EnsembleStrategy::Split, EnsembleStrategy::SampleWithReplacement, EnsembleStrategy::Shuffle}) {
        RunConfig c = base;
        c.ensemble_strategy = s;
        c.ensemble_size = n;
        out.emplace_back(label(to_string(s)), c);
      }
      break;
    }
  }
  return out;
}

std::vector<ResultRow> ablation_suite(const RunConfig& base, AblationAxis axis,
                                      const std::optional<std::filesystem::path>& out_dir) {
  const auto settings = ablation_settings(base, axis);
  std::vector<ResultRow> rows;
  std::optional<DmdrArtifacts> shared;
  std::optional<PolicyBundle> shared_bc;
  for (const auto& [name, cfg] : settings) {
    ExperimentRun run;
    if (axis == AblationAxis::RestoreVariant) {
      if (!shared) shared = run_dmdr(cfg);
      DmdrArtifacts a = *shared;
      a.restored = in_stage(Stage::Restore, [&] {
        return restore_demos(a.noisy, a.filter.result, a.restorers, cfg.gate, stage_seed(cfg.seed, "restore"));
      });
      run = finish(cfg, name, std::move(a), shared_bc ? &*shared_bc : nullptr);
      if (!shared_bc) shared_bc = run.bc_policy;
    } else if (axis == AblationAxis::EnsembleStrategy) {
      if (!shared) shared = run_dmdr(cfg);
      run = finish(cfg, name, *shared, nullptr);
    } else {
      run = run_experiment(cfg, name);
    }
    if (out_dir) save_experiment(*out_dir / name, cfg, run);
    rows.insert(rows.end(), run.rows.begin(), run.rows.end());
  }
  if (out_dir) {
    write_results_csv(*out_dir / "results.csv", rows);
    save_summary_json(*out_dir / "summary.json", rows);
  }
  return rows;
}

void save_summary_json(const std::filesystem::path& path, const std::vector<ResultRow>& rows) {
  // Keyed in first-appearance order.
  std::vector<std::pair<std::string, std::string>> order;
  std::map<std::pair<std::string, std::string>, std::vector<double>> values;
  for (const auto& r : rows) {
    const auto key = std::make_pair(r.setting, r.metric);
    if (!values.count(key)) order.push_back(key);
    values[key].push_back(r.value);
  }
  nlohmann::ordered_json j = nlohmann::ordered_json::array();
  for (const auto& key : order) {
    const auto& v = values[key];
    double mean = 0.0, var = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    for (double x : v) var += (x - mean) * (x - mean);
    j.push_back({{"setting", key.first},
                 {"metric", key.second},
                 {"n", v.size()},
                 {"mean", mean},
                 {"std", std::sqrt(var / static_cast<double>(v.size()))}});
  }
  detail::write_file(path, j.dump(2) + "\n");
}

void save_run_manifest(const std::filesystem::path& path, const RunConfig& config,
                       const std::vector<std::pair<std::string, std::string>>& checksums,
                       const std::vector<StageTiming>& timings) {
  nlohmann::ordered_json j;
  j["format"] = "demoforge-run-1";
  j["config_hash"] = config_hash(config);
  j["config"] = nlohmann::ordered_json::object();
  for (const auto& [k, v] : config_entries(config)) j["config"][k] = v;
  j["checksums"] = nlohmann::ordered_json::object();
  for (const auto& [k, v] : checksums) j["checksums"][k] = v;
  j["timings"] = nlohmann::ordered_json::array();
  for (const auto& t : timings) j["timings"].push_back({{"stage", t.stage}, {"seconds", t.seconds}});
  detail::write_file(path, j.dump(2) + "\n");
}

RunConfig load_manifest_config(const std::filesystem::path& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(detail::read_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
  if (j.value("format", "") != "demoforge-run-1") throw FormatError(path.string() + ": not a run manifest");
  RunConfig c;
  for (const auto& [k, v] : j.at("config").items()) apply_override(c, k, v.get<std::string>());
  validate(c);
  return c;
}

}  // namespace demoforge
