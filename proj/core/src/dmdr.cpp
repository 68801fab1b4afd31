#include "demoforge/pipeline/dmdr.hpp"

#include <chrono>

#include "binary_io.hpp"
#include "demoforge/demos/demo_io.hpp"
#include "demoforge/parallel.hpp"
#include "json.hpp"

namespace demoforge {

std::string to_string(Stage s) {
  switch (s) {
    case Stage::GenDemos: return "gen-demos";
    case Stage::Corrupt: return "corrupt";
    case Stage::Filter: return "filter";
    case Stage::TrainRestorers: return "train-restorers";
    case Stage::Restore: return "restore";
    case Stage::TrainPolicy: return "train-policy";
    case Stage::Eval: return "eval";
    case Stage::Report: return "report";
  }
  return "unknown";
}

std::uint64_t stage_seed(std::uint64_t master, std::string_view stage) { return derive_seed(master, stage); }

Restorers train_restorers(const DemoSet& noisy, const FilterResult& filter, const RunConfig& config,
                          std::uint64_t seed) {
  const auto& clean = filter.subset(Subset::CleanPair);
  if (clean.empty()) throw EmptyBatchError("no clean pairs to train restorers on");
  Matrix states, actions;
  nn::gather_columns(noisy.states(), clean, states);
  nn::gather_columns(noisy.actions(), clean, actions);
  const auto schedule = make_schedule(config.diffusion.T, config.diffusion.beta_start, config.diffusion.beta_end);

  Restorers r;
  // The four models share nothing but read-only data.
  parallel_for(4, [&](std::size_t job) {
    switch (job) {
      case 0:
        r.theta_s = train_cond_diffusion(states, actions, DiffusionRole::StateModel, config.diffusion,
                                         derive_seed(seed, "theta_s"));
        break;
      case 1:
        r.theta_a = train_cond_diffusion(actions, states, DiffusionRole::ActionModel, config.diffusion,
                                         derive_seed(seed, "theta_a"));
        break;
      case 2:
        r.psi_s = train_predictor(states, actions, DiffusionRole::StateModel, schedule, config.predictor,
                                  derive_seed(seed, "psi_s"));
        break;
      default:
        r.psi_a = train_predictor(actions, states, DiffusionRole::ActionModel, schedule, config.predictor,
                                  derive_seed(seed, "psi_a"));
        break;
    }
  });
  return r;
}

namespace {

std::optional<RestorationQuality> quality(const Matrix& before, const Matrix& after, const Matrix& truth,
                                          const GateOutcome& gate) {
  RestorationQuality q;
  for (Eigen::Index j = 0; j < before.cols(); ++j) {
    if (!gate.restored[static_cast<std::size_t>(j)]) continue;
    ++q.count;
    q.corrupted_mse += (before.col(j) - truth.col(j)).squaredNorm();
    q.restored_mse += (after.col(j) - truth.col(j)).squaredNorm();
  }
  if (q.count == 0) return std::nullopt;
  q.corrupted_mse /= static_cast<double>(q.count);
  q.restored_mse /= static_cast<double>(q.count);
  return q;
}

std::vector<std::uint64_t> sample_seeds(std::uint64_t seed, const std::vector<std::size_t>& pairs) {
  std::vector<std::uint64_t> out;
  out.reserve(pairs.size());
  for (auto p : pairs) out.push_back(derive_seed(seed, static_cast<std::uint64_t>(p)));
  return out;
}

}  // namespace

RestoreOutput restore_demos(const DemoSet& noisy, const FilterResult& filter, const Restorers& restorers,
                            const GateConfig& gate, std::uint64_t seed) {
  if (filter.size() != noisy.size()) throw ShapeError("filter result does not match the demo set");
  RestoreOutput out;
  out.report.variant = gate.variant;
  out.report.t_thres = gate.t_thres;
  out.report.fixed_t = gate.fixed_t;

  const auto& ns_idx = filter.subset(Subset::NoisyStateCleanAction);
  const auto& na_idx = filter.subset(Subset::CleanStateNoisyAction);
  Matrix s_noisy, s_cond, a_noisy, a_cond;
  nn::gather_columns(noisy.states(), ns_idx, s_noisy);
  nn::gather_columns(noisy.actions(), ns_idx, s_cond);
  nn::gather_columns(noisy.actions(), na_idx, a_noisy);
  nn::gather_columns(noisy.states(), na_idx, a_cond);

  const auto s_seeds = sample_seeds(derive_seed(seed, "restore.state"), ns_idx);
  const auto a_seeds = sample_seeds(derive_seed(seed, "restore.action"), na_idx);
  out.state_gate = gate_and_restore(s_noisy, s_cond, &restorers.psi_s, restorers.theta_s, gate, s_seeds);
  out.action_gate = gate_and_restore(a_noisy, a_cond, &restorers.psi_a, restorers.theta_a, gate, a_seeds);
  // Stored demos are f32; rounding here keeps in-memory runs equal to staged CLI runs.
  const auto to_f32 = [](double v) { return static_cast<double>(static_cast<float>(v)); };
  out.state_gate.values = out.state_gate.values.unaryExpr(to_f32);
  out.action_gate.values = out.action_gate.values.unaryExpr(to_f32);

  Matrix states = noisy.states();
  Matrix actions = noisy.actions();
  for (std::size_t j = 0; j < ns_idx.size(); ++j) {
    states.col(static_cast<Eigen::Index>(ns_idx[j])) = out.state_gate.values.col(static_cast<Eigen::Index>(j));
  }
  for (std::size_t j = 0; j < na_idx.size(); ++j) {
    actions.col(static_cast<Eigen::Index>(na_idx[j])) = out.action_gate.values.col(static_cast<Eigen::Index>(j));
  }
  DemoSet merged = DemoSet::from_columns(std::move(states), std::move(actions), noisy.lengths());
  merged.meta() = noisy.meta();
  if (noisy.has_ground_truth()) merged.set_ground_truth(noisy.clean_states(), noisy.clean_actions());

  for (std::size_t i = 0; i < noisy.size(); ++i) {
    if (!(filter.state_clean[i] == 0 && filter.action_clean[i] == 0)) out.source_index.push_back(i);
  }
  out.dataset = merged.select(out.source_index);

  if (out.dataset.has_ground_truth()) {
    const auto n = out.dataset.size();
    std::vector<std::uint8_t> sm(n), am(n);
    for (std::size_t j = 0; j < n; ++j) {
      const auto c = static_cast<Eigen::Index>(j);
      sm[j] = out.dataset.states().col(c) != out.dataset.clean_states().col(c);
      am[j] = out.dataset.actions().col(c) != out.dataset.clean_actions().col(c);
    }
    out.dataset.set_masks(std::move(sm), std::move(am));

    Matrix truth;
    nn::gather_columns(noisy.clean_states(), ns_idx, truth);
    out.report.state_quality = quality(s_noisy, out.state_gate.values, truth, out.state_gate);
    nn::gather_columns(noisy.clean_actions(), na_idx, truth);
    out.report.action_quality = quality(a_noisy, out.action_gate.values, truth, out.action_gate);
  }

  auto& rep = out.report.subsets;
  rep[static_cast<std::size_t>(Subset::CleanPair)].size = filter.subset(Subset::CleanPair).size();
  rep[static_cast<std::size_t>(Subset::CleanPair)].passed = filter.subset(Subset::CleanPair).size();
  rep[static_cast<std::size_t>(Subset::NoisyStateCleanAction)] = {ns_idx.size(), out.state_gate.passed_count,
                                                                  out.state_gate.restored_count, 0};
  rep[static_cast<std::size_t>(Subset::CleanStateNoisyAction)] = {na_idx.size(), out.action_gate.passed_count,
                                                                  out.action_gate.restored_count, 0};
  const auto discarded = filter.subset(Subset::NoisyPair).size();
  rep[static_cast<std::size_t>(Subset::NoisyPair)] = {discarded, 0, 0, discarded};
  out.report.final_size = out.dataset.size();
  return out;
}

void save_restore_report(const std::filesystem::path& path, const RestoreReport& report) {
  static constexpr const char* kNames[] = {"clean_pair", "clean_state_noisy_action", "noisy_state_clean_action",
                                           "noisy_pair"};
  nlohmann::ordered_json j;
  j["variant"] = to_string(report.variant);
  j["t_thres"] = report.t_thres;
  j["fixed_t"] = report.fixed_t;
  for (std::size_t s = 0; s < 4; ++s) {
    const auto& c = report.subsets[s];
    j["subsets"][kNames[s]] = {{"size", c.size}, {"passed", c.passed}, {"restored", c.restored}, {"discarded", c.discarded}};
  }
  j["final_size"] = report.final_size;
  const auto q = [](const std::optional<RestorationQuality>& q) -> nlohmann::ordered_json {
    if (!q) return nullptr;
    return {{"count", q->count}, {"corrupted_mse", q->corrupted_mse}, {"restored_mse", q->restored_mse}};
  };
  j["state_quality"] = q(report.state_quality);
  j["action_quality"] = q(report.action_quality);
  detail::write_file(path, j.dump(2) + "\n");
}

namespace {

template <typename F>
auto timed(std::vector<StageTiming>& timings, Stage stage, F&& fn) -> decltype(fn()) {
  const auto t0 = std::chrono::steady_clock::now();
  if constexpr (std::is_void_v<decltype(fn())>) {
    in_stage(stage, fn);
    timings.push_back({to_string(stage), std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count()});
  } else {
    auto r = in_stage(stage, fn);
    timings.push_back({to_string(stage), std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count()});
    return r;
  }
}

}  // namespace

DmdrArtifacts run_dmdr(const RunConfig& config) {
  in_stage(Stage::GenDemos, [&] { validate(config); });
  DmdrArtifacts a;
  const ToyEnv env = config.make_env();
  a.clean = timed(a.timings, Stage::GenDemos,
                  [&] { return gen_expert_demos(env, config.dataset_size, stage_seed(config.seed, "gen")); });
  a.noisy = timed(a.timings, Stage::Corrupt, [&] {
    NoiseSpec spec = config.noise;
    spec.seed = stage_seed(config.seed, "corrupt");
    return corrupt(a.clean, spec);
  });
  a.filter = timed(a.timings, Stage::Filter,
                   [&] { return filter_variant(a.noisy, config.filter, stage_seed(config.seed, "filter")); });
  a.restorers = timed(a.timings, Stage::TrainRestorers, [&] {
    return train_restorers(a.noisy, a.filter.result, config, stage_seed(config.seed, "restorers"));
  });
  a.restored = timed(a.timings, Stage::Restore, [&] {
    return restore_demos(a.noisy, a.filter.result, a.restorers, config.gate, stage_seed(config.seed, "restore"));
  });
  return a;
}

void save_artifacts(const std::filesystem::path& dir, const DmdrArtifacts& a) {
  std::filesystem::create_directories(dir / "checkpoints");
  save_demos(dir / "demos_clean.dfd", a.clean);
  save_demos(dir / "demos_noisy.dfd", a.noisy);
  save_filter_json(dir / "filter.json", a.filter.result);
  if (a.filter.autoencoders) {
    nn::save_checkpoint(dir / "checkpoints" / "phi_s", to_checkpoint(a.filter.autoencoders->state, "phi_s"));
    nn::save_checkpoint(dir / "checkpoints" / "phi_a", to_checkpoint(a.filter.autoencoders->action, "phi_a"));
  }
  nn::save_checkpoint(dir / "checkpoints" / "theta_s", to_checkpoint(a.restorers.theta_s));
  nn::save_checkpoint(dir / "checkpoints" / "theta_a", to_checkpoint(a.restorers.theta_a));
  nn::save_checkpoint(dir / "checkpoints" / "psi_s", to_checkpoint(a.restorers.psi_s));
  nn::save_checkpoint(dir / "checkpoints" / "psi_a", to_checkpoint(a.restorers.psi_a));
  save_schedule_json(dir / "schedule.json", a.restorers.theta_s.schedule);
  save_restore_report(dir / "restore_report.json", a.restored.report);
  save_demos(dir / "demos_restored.dfd", a.restored.dataset);
}

std::vector<std::pair<std::string, std::string>> component_checksums(const DmdrArtifacts& a) {
  std::vector<std::pair<std::string, std::string>> out;
  if (a.filter.autoencoders) {
    out.emplace_back("phi_s", nn::parameter_checksum(a.filter.autoencoders->state.net));
    out.emplace_back("phi_a", nn::parameter_checksum(a.filter.autoencoders->action.net));
  }
  out.emplace_back("theta_s", nn::parameter_checksum(a.restorers.theta_s.eps_net));
  out.emplace_back("theta_a", nn::parameter_checksum(a.restorers.theta_a.eps_net));
  out.emplace_back("psi_s", nn::parameter_checksum(a.restorers.psi_s.net));
  out.emplace_back("psi_a", nn::parameter_checksum(a.restorers.psi_a.net));
  return out;
}

}  // namespace demoforge
