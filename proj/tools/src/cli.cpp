#include "demoforge_cli/cli.hpp"

#include <optional>
#include <ostream>

#include "CLI11.hpp"
#include "demoforge/demos/demo_io.hpp"

namespace demoforge::cli {

namespace fs = std::filesystem;

int exit_code_for(Stage stage) { return kStageBase + static_cast<int>(stage); }

namespace {

struct Options {
  std::string config_path;
  std::string out_dir;
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> seed;
  std::optional<int> episodes;
  std::optional<int> seeds;
  std::string axis;
  std::string data = "restored";
};

RunConfig resolve_config(const Options& o) {
  RunConfig c = o.config_path.empty() ? RunConfig{} : parse_config(o.config_path);
  for (const auto& kv : o.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw ConfigError("override '" + kv + "' is not KEY=VALUE");
    apply_override(c, kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (o.seed) c.seed = *o.seed;
  if (o.episodes) c.eval_episodes = *o.episodes;
  if (o.seeds) c.eval_seeds = *o.seeds;
  validate(c);
  return c;
}

DemoSet load_stage_input(const fs::path& path, Stage stage) {
  return in_stage(stage, [&] {
    if (!fs::exists(path)) throw IoError("missing input " + path.string() + "; run the previous stage first");
    return load_demos(path);
  });
}

Restorers load_restorers(const fs::path& dir) {
  const auto schedule = load_schedule_json(dir / "schedule.json");
  const auto ck = dir / "checkpoints";
  return {diffusion_from_checkpoint(nn::load_checkpoint(ck / "theta_s"), schedule),
          diffusion_from_checkpoint(nn::load_checkpoint(ck / "theta_a"), schedule),
          predictor_from_checkpoint(nn::load_checkpoint(ck / "psi_s")),
          predictor_from_checkpoint(nn::load_checkpoint(ck / "psi_a"))};
}

PolicyBundle load_policy(const fs::path& dir) {
  PolicyBundle b;
  for (std::size_t m = 0;; ++m) {
    const auto member = dir / ("member_" + std::to_string(m));
    if (!fs::exists(member)) break;
    const auto ckpt = nn::load_checkpoint(member);
    b.members.push_back(ckpt.model);
    if (auto it = ckpt.attributes.find("strategy"); it != ckpt.attributes.end()) {
      b.strategy = ensemble_strategy_from_string(it->second);
    }
  }
  if (b.members.empty()) throw IoError("no policy members under " + dir.string());
  b.aggregation = b.members.size() > 1 ? Aggregation::Mean : Aggregation::Single;
  return b;
}

void save_policy(const fs::path& dir, const PolicyBundle& bundle) {
  fs::remove_all(dir);
  for (std::size_t m = 0; m < bundle.size(); ++m) {
    nn::save_checkpoint(dir / ("member_" + std::to_string(m)),
                        {"policy", bundle.members[m], {{"strategy", to_string(bundle.strategy)}}});
  }
}

std::string policy_dir_for(const std::string& data) {
  if (data == "restored") return "policy";
  if (data == "noisy") return "policy_bc";
  return "policy_clean";
}

std::string demos_file_for(const std::string& data) {
  if (data == "restored") return "demos_restored.dfd";
  if (data == "noisy") return "demos_noisy.dfd";
  return "demos_clean.dfd";
}

int dispatch(const std::string& verb, const Options& o, std::ostream& out) {
  const RunConfig cfg = resolve_config(o);
  const fs::path dir = o.out_dir;
  fs::create_directories(dir);

  if (verb == "gen-demos") {
    const auto demos = in_stage(Stage::GenDemos, [&] {
      return gen_expert_demos(cfg.make_env(), cfg.dataset_size, stage_seed(cfg.seed, "gen"));
    });
    save_demos(dir / "demos_clean.dfd", demos);
    out << "wrote " << demos.size() << " pairs in " << demos.trajectory_count() << " trajectories\n";
  } else if (verb == "corrupt") {
    const auto clean = load_stage_input(dir / "demos_clean.dfd", Stage::Corrupt);
    const auto noisy = in_stage(Stage::Corrupt, [&] {
      NoiseSpec spec = cfg.noise;
      spec.seed = stage_seed(cfg.seed, "corrupt");
      return corrupt(clean, spec);
    });
    save_demos(dir / "demos_noisy.dfd", noisy);
    std::size_t s = 0, a = 0;
    for (std::size_t i = 0; i < noisy.size(); ++i) {
      s += noisy.state_mask()[i];
      a += noisy.action_mask()[i];
    }
    out << "corrupted " << s << " states and " << a << " actions of " << noisy.size() << "\n";
  } else if (verb == "filter") {
    const auto noisy = load_stage_input(dir / "demos_noisy.dfd", Stage::Filter);
    const auto f = in_stage(Stage::Filter, [&] { return filter_variant(noisy, cfg.filter, stage_seed(cfg.seed, "filter")); });
    save_filter_json(dir / "filter.json", f.result);
    if (f.autoencoders) {
      nn::save_checkpoint(dir / "checkpoints" / "phi_s", to_checkpoint(f.autoencoders->state, "phi_s"));
      nn::save_checkpoint(dir / "checkpoints" / "phi_a", to_checkpoint(f.autoencoders->action, "phi_a"));
    }
    for (std::size_t k = 0; k < 4; ++k) out << "subset " << k << ": " << f.result.subsets[k].size() << " pairs\n";
  } else if (verb == "train-restorers") {
    const auto noisy = load_stage_input(dir / "demos_noisy.dfd", Stage::TrainRestorers);
    const auto r = in_stage(Stage::TrainRestorers, [&] {
      const auto filter = load_filter_json(dir / "filter.json");
      return train_restorers(noisy, filter, cfg, stage_seed(cfg.seed, "restorers"));
    });
    nn::save_checkpoint(dir / "checkpoints" / "theta_s", to_checkpoint(r.theta_s));
    nn::save_checkpoint(dir / "checkpoints" / "theta_a", to_checkpoint(r.theta_a));
    nn::save_checkpoint(dir / "checkpoints" / "psi_s", to_checkpoint(r.psi_s));
    nn::save_checkpoint(dir / "checkpoints" / "psi_a", to_checkpoint(r.psi_a));
    save_schedule_json(dir / "schedule.json", r.theta_s.schedule);
    out << "trained theta_s, theta_a, psi_s, psi_a\n";
  } else if (verb == "restore") {
    const auto noisy = load_stage_input(dir / "demos_noisy.dfd", Stage::Restore);
    const auto r = in_stage(Stage::Restore, [&] {
      const auto filter = load_filter_json(dir / "filter.json");
      return restore_demos(noisy, filter, load_restorers(dir), cfg.gate, stage_seed(cfg.seed, "restore"));
    });
    save_demos(dir / "demos_restored.dfd", r.dataset);
    save_restore_report(dir / "restore_report.json", r.report);
    out << "final set: " << r.report.final_size << " pairs\n";
  } else if (verb == "train-policy") {
    const auto data = load_stage_input(dir / demos_file_for(o.data), Stage::TrainPolicy);
    const auto bundle = in_stage(Stage::TrainPolicy, [&] {
      return train_bc(data, cfg.ensemble_strategy, cfg.ensemble_size, cfg.policy, stage_seed(cfg.seed, "policy"));
    });
    save_policy(dir / policy_dir_for(o.data), bundle);
    out << "trained " << bundle.size() << " policy member(s) on " << data.size() << " pairs\n";
  } else if (verb == "eval") {
    std::vector<ResultRow> rows;
    in_stage(Stage::Eval, [&] {
      const ToyEnv env = cfg.make_env();
      for (const auto& [data, prefix] : {std::pair{"noisy", "bc"}, std::pair{"restored", "dmdr"}, std::pair{"clean", "clean"}}) {
        const auto pdir = dir / policy_dir_for(data);
        if (!fs::exists(pdir)) continue;
        const auto table = evaluate(load_policy(pdir), env, cfg.eval_episodes, cfg.eval_seeds, stage_seed(cfg.seed, "eval"));
        for (std::size_t s = 0; s < table.per_seed.size(); ++s) {
          rows.push_back({"eval", static_cast<int>(s), std::string(prefix) + "." + to_string(table.metric), table.per_seed[s]});
        }
        out << prefix << " " << to_string(table.metric) << ": " << table.mean << " +- " << table.stddev << "\n";
      }
      if (rows.empty()) throw IoError("no trained policy under " + dir.string());
    });
    write_results_csv(dir / "results.csv", rows);
  } else if (verb == "pipeline") {
    const auto run = run_experiment(cfg, "pipeline");
    save_experiment(dir, cfg, run);
    out << format_results_table(run.rows);
  } else if (verb == "ablate") {
    const auto axis = ablation_axis_from_string(o.axis);
    const auto rows = ablation_suite(cfg, axis, dir);
    save_run_manifest(dir / "run_manifest.json", cfg, {}, {});
    out << format_results_table(rows);
  } else if (verb == "report") {
    out << in_stage(Stage::Report, [&] { return render_report(dir); });
  }
  return kOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Filter-and-restore pipeline for noisy demonstrations"};
  app.require_subcommand(1);
  Options o;

  const std::vector<std::pair<std::string, std::string>> verbs = {
      {"gen-demos", "Roll out the scripted expert"},
      {"corrupt", "Inject noise into clean demonstrations"},
      {"filter", "Train autoencoders, score with LOF, partition"},
      {"train-restorers", "Train diffusion models and timestep predictors on the clean pairs"},
      {"restore", "Gate and restore flagged samples"},
      {"train-policy", "Behavioral cloning on a demo set"},
      {"eval", "Evaluate trained policies"},
      {"pipeline", "Run every stage and evaluate against plain BC"},
      {"ablate", "Run an ablation axis"},
      {"report", "Render results.csv as tables"},
  };
  for (const auto& [name, help] : verbs) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("--config", o.config_path, "Config file (key = value)")->check(CLI::ExistingFile);
    sub->add_option("--out", o.out_dir, "Output directory")->required();
    sub->add_option("--override", o.overrides, "KEY=VALUE, repeatable")->take_all();
    sub->add_option("--seed", o.seed, "Master seed");
    sub->add_option("--episodes", o.episodes, "Episodes per evaluation seed")->check(CLI::PositiveNumber);
    sub->add_option("--seeds", o.seeds, "Evaluation seeds")->check(CLI::PositiveNumber);
    if (name == "ablate") {
      sub->add_option("--axis", o.axis, "filter_variant | restore_variant | trusted_fraction | noise_type | "
                                          "noise_level | ensemble_strategy")
          ->required();
    }
    if (name == "train-policy") {
      sub->add_option("--data", o.data, "Training set")->check(CLI::IsMember({"restored", "noisy", "clean"}));
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  const std::string verb = app.get_subcommands().front()->get_name();
  try {
    return dispatch(verb, o, out);
  } catch (const StageError& e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e.stage());
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kConfig;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return e.kind() == ErrorKind::Io || e.kind() == ErrorKind::Format ? kIo : kUsage;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kIo;
  }
}

}  // namespace demoforge::cli
