#include "demoforge/pipeline/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>

#include "binary_io.hpp"
#include "decimal.hpp"
#include "demoforge/error.hpp"

namespace demoforge {

void RunConfig::set_batch_size(int b) {
  filter.autoencoder.train.batch_size = b;
  diffusion.train.batch_size = b;
  predictor.train.batch_size = b;
  policy.train.batch_size = b;
}

ToyEnv RunConfig::make_env() const {
  ToyEnv e = ToyEnv::make(env);
  if (expert_gain) e.expert_gain = *expert_gain;
  return e;
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void bad(const std::string& key, const std::string& why) {
  throw ConfigError("field '" + key + "': " + why);
}

double parse_real(const std::string& key, const std::string& v, double lo, double hi, bool open_lo = false,
                  bool open_hi = false) {
  double x = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
  if (ec != std::errc() || ptr != v.data() + v.size()) bad(key, "expected a number, got '" + v + "'");
  const bool below = open_lo ? !(x > lo) : !(x >= lo);
  const bool above = open_hi ? !(x < hi) : !(x <= hi);
  if (below || above) {
    bad(key, "value " + v + " outside " + std::string(open_lo ? "(" : "[") + detail::exact_decimal(lo) + ", " +
                 detail::exact_decimal(hi) + (open_hi ? ")" : "]"));
  }
  return x;
}

long long parse_integer(const std::string& key, const std::string& v, long long lo, long long hi) {
  long long x = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
  if (ec != std::errc() || ptr != v.data() + v.size()) bad(key, "expected an integer, got '" + v + "'");
  if (x < lo || x > hi) bad(key, "value " + v + " outside [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
  return x;
}

std::uint64_t parse_u64(const std::string& key, const std::string& v) {
  std::uint64_t x = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
  if (ec != std::errc() || ptr != v.data() + v.size()) bad(key, "expected a non-negative integer, got '" + v + "'");
  return x;
}

std::vector<int> parse_dims(const std::string& key, const std::string& v) {
  std::vector<int> dims;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) dims.push_back(static_cast<int>(parse_integer(key, trim(item), 1, 1 << 16)));
  if (dims.empty()) bad(key, "expected a comma-separated list of layer widths");
  return dims;
}

std::string join_dims(const std::vector<int>& dims) {
  std::string out;
  for (std::size_t i = 0; i < dims.size(); ++i) out += (i ? "," : "") + std::to_string(dims[i]);
  return out;
}

template <typename F>
auto as_enum(const std::string& key, F&& from_string) {
  try {
    return from_string();
  } catch (const Error& e) {
    bad(key, e.what());
  }
}

struct Field {
  std::string key;
  std::function<std::string(const RunConfig&)> get;
  std::function<void(RunConfig&, const std::string&)> set;
};


const std::vector<Field>& fields() {
  using C = RunConfig;
  const auto dec = [](double x) { return detail::exact_decimal(x); };
  static const std::vector<Field> table = {
      {"env.kind", [](const C& c) { return to_string(c.env); },
       [](C& c, const std::string& v) { c.env = as_enum("env.kind", [&] { return env_kind_from_string(v); }); }},
      {"env.expert_gain", [dec](const C& c) { return c.expert_gain ? dec(*c.expert_gain) : std::string("default"); },
       [](C& c, const std::string& v) {
         if (v == "default") {
           c.expert_gain.reset();
         } else {
           c.expert_gain = parse_real("env.expert_gain", v, 0.0, 1e6, true);
         }
       }},
      {"env.dataset_size", [](const C& c) { return std::to_string(c.dataset_size); },
       [](C& c, const std::string& v) {
         c.dataset_size = static_cast<std::size_t>(parse_integer("env.dataset_size", v, 1, 10'000'000));
       }},
      {"noise.family", [](const C& c) { return to_string(c.noise.family); },
       [](C& c, const std::string& v) {
         c.noise.family = as_enum("noise.family", [&] { return noise_family_from_string(v); });
       }},
      {"noise.p", [dec](const C& c) { return dec(c.noise.p); },
       [](C& c, const std::string& v) { c.noise.p = parse_real("noise.p", v, 0.0, 1.0); }},
      {"noise.sigma", [dec](const C& c) { return dec(c.noise.sigma); },
       [](C& c, const std::string& v) { c.noise.sigma = parse_real("noise.sigma", v, 0.0, 1e6, true); }},
      {"noise.bias", [dec](const C& c) { return dec(c.noise.bias); },
       [](C& c, const std::string& v) { c.noise.bias = parse_real("noise.bias", v, -1e6, 1e6); }},
      {"noise.mix_weight", [dec](const C& c) { return dec(c.noise.mix_weight); },
       [](C& c, const std::string& v) { c.noise.mix_weight = parse_real("noise.mix_weight", v, 0.0, 1.0); }},
      {"noise.mix_offset", [dec](const C& c) { return dec(c.noise.mix_offset); },
       [](C& c, const std::string& v) { c.noise.mix_offset = parse_real("noise.mix_offset", v, -1e6, 1e6); }},
      {"filter.variant", [](const C& c) { return to_string(c.filter.variant); },
       [](C& c, const std::string& v) {
         c.filter.variant = as_enum("filter.variant", [&] { return filter_variant_from_string(v); });
       }},
      {"filter.trusted_fraction", [dec](const C& c) { return dec(c.filter.trusted_fraction); },
       [](C& c, const std::string& v) {
         c.filter.trusted_fraction = parse_real("filter.trusted_fraction", v, 0.0, 1.0, true, true);
       }},
      {"filter.lof_k", [](const C& c) { return std::to_string(c.filter.lof.k); },
       [](C& c, const std::string& v) { c.filter.lof.k = static_cast<int>(parse_integer("filter.lof_k", v, 1, 100000)); }},
      {"autoencoder.hidden", [](const C& c) { return join_dims(c.filter.autoencoder.hidden_dims); },
       [](C& c, const std::string& v) { c.filter.autoencoder.hidden_dims = parse_dims("autoencoder.hidden", v); }},
      {"autoencoder.epochs", [](const C& c) { return std::to_string(c.filter.autoencoder.train.epochs); },
       [](C& c, const std::string& v) {
         c.filter.autoencoder.train.epochs = static_cast<int>(parse_integer("autoencoder.epochs", v, 0, 1'000'000));
       }},
      {"autoencoder.lr", [dec](const C& c) { return dec(c.filter.autoencoder.train.learning_rate); },
       [](C& c, const std::string& v) {
         c.filter.autoencoder.train.learning_rate = parse_real("autoencoder.lr", v, 0.0, 1.0, true);
       }},
      {"diffusion.T", [](const C& c) { return std::to_string(c.diffusion.T); },
       [](C& c, const std::string& v) { c.diffusion.T = static_cast<int>(parse_integer("diffusion.T", v, 1, 100000)); }},
      {"diffusion.beta_start", [dec](const C& c) { return dec(c.diffusion.beta_start); },
       [](C& c, const std::string& v) {
         c.diffusion.beta_start = parse_real("diffusion.beta_start", v, 0.0, 1.0, true, true);
       }},
      {"diffusion.beta_end", [dec](const C& c) { return dec(c.diffusion.beta_end); },
       [](C& c, const std::string& v) { c.diffusion.beta_end = parse_real("diffusion.beta_end", v, 0.0, 1.0, true, true); }},
      {"diffusion.embed_dim", [](const C& c) { return std::to_string(c.diffusion.embed_dim); },
       [](C& c, const std::string& v) {
         const auto d = parse_integer("diffusion.embed_dim", v, 2, 4096);
         if (d % 2) bad("diffusion.embed_dim", "must be even");
         c.diffusion.embed_dim = static_cast<int>(d);
       }},
      {"diffusion.hidden", [](const C& c) { return join_dims(c.diffusion.hidden_dims); },
       [](C& c, const std::string& v) { c.diffusion.hidden_dims = parse_dims("diffusion.hidden", v); }},
      {"diffusion.epochs", [](const C& c) { return std::to_string(c.diffusion.train.epochs); },
       [](C& c, const std::string& v) {
         c.diffusion.train.epochs = static_cast<int>(parse_integer("diffusion.epochs", v, 0, 1'000'000));
       }},
      {"diffusion.lr", [dec](const C& c) { return dec(c.diffusion.train.learning_rate); },
       [](C& c, const std::string& v) { c.diffusion.train.learning_rate = parse_real("diffusion.lr", v, 0.0, 1.0, true); }},
      {"predictor.hidden", [](const C& c) { return join_dims(c.predictor.hidden_dims); },
       [](C& c, const std::string& v) { c.predictor.hidden_dims = parse_dims("predictor.hidden", v); }},
      {"predictor.epochs", [](const C& c) { return std::to_string(c.predictor.train.epochs); },
       [](C& c, const std::string& v) {
         c.predictor.train.epochs = static_cast<int>(parse_integer("predictor.epochs", v, 0, 1'000'000));
       }},
      {"predictor.lr", [dec](const C& c) { return dec(c.predictor.train.learning_rate); },
       [](C& c, const std::string& v) { c.predictor.train.learning_rate = parse_real("predictor.lr", v, 0.0, 1.0, true); }},
      {"restore.variant", [](const C& c) { return to_string(c.gate.variant); },
       [](C& c, const std::string& v) {
         c.gate.variant = as_enum("restore.variant", [&] { return restore_variant_from_string(v); });
       }},
      {"restore.t_thres", [](const C& c) { return std::to_string(c.gate.t_thres); },
       [](C& c, const std::string& v) { c.gate.t_thres = static_cast<int>(parse_integer("restore.t_thres", v, 0, 100001)); }},
      {"restore.fixed_t", [](const C& c) { return std::to_string(c.gate.fixed_t); },
       [](C& c, const std::string& v) { c.gate.fixed_t = static_cast<int>(parse_integer("restore.fixed_t", v, 1, 100000)); }},
      {"policy.hidden", [](const C& c) { return join_dims(c.policy.hidden_dims); },
       [](C& c, const std::string& v) { c.policy.hidden_dims = parse_dims("policy.hidden", v); }},
      {"policy.epochs", [](const C& c) { return std::to_string(c.policy.train.epochs); },
       [](C& c, const std::string& v) {
         c.policy.train.epochs = static_cast<int>(parse_integer("policy.epochs", v, 0, 1'000'000));
       }},
      {"policy.lr", [dec](const C& c) { return dec(c.policy.train.learning_rate); },
       [](C& c, const std::string& v) { c.policy.train.learning_rate = parse_real("policy.lr", v, 0.0, 1.0, true); }},
      {"policy.strategy", [](const C& c) { return to_string(c.ensemble_strategy); },
       [](C& c, const std::string& v) {
         c.ensemble_strategy = as_enum("policy.strategy", [&] { return ensemble_strategy_from_string(v); });
       }},
      {"policy.members", [](const C& c) { return std::to_string(c.ensemble_size); },
       [](C& c, const std::string& v) { c.ensemble_size = static_cast<int>(parse_integer("policy.members", v, 1, 1000)); }},
      {"train.batch_size", [](const C& c) { return std::to_string(c.policy.train.batch_size); },
       [](C& c, const std::string& v) { c.set_batch_size(static_cast<int>(parse_integer("train.batch_size", v, 1, 1 << 20))); }},
      {"run.seed", [](const C& c) { return std::to_string(c.seed); },
       [](C& c, const std::string& v) { c.seed = parse_u64("run.seed", v); }},
      {"eval.episodes", [](const C& c) { return std::to_string(c.eval_episodes); },
       [](C& c, const std::string& v) { c.eval_episodes = static_cast<int>(parse_integer("eval.episodes", v, 1, 1'000'000)); }},
      {"eval.seeds", [](const C& c) { return std::to_string(c.eval_seeds); },
       [](C& c, const std::string& v) { c.eval_seeds = static_cast<int>(parse_integer("eval.seeds", v, 1, 10000)); }},
  };
  return table;
}

}  // namespace

void validate(const RunConfig& c) {
  if (c.diffusion.beta_start > c.diffusion.beta_end) bad("diffusion.beta_start", "must not exceed diffusion.beta_end");
  if (c.gate.fixed_t > c.diffusion.T) bad("restore.fixed_t", "must not exceed diffusion.T");
  if (c.gate.t_thres > c.diffusion.T + 1) bad("restore.t_thres", "must not exceed diffusion.T + 1");
}

std::vector<std::pair<std::string, std::string>> config_entries(const RunConfig& config) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& f : fields()) out.emplace_back(f.key, f.get(config));
  return out;
}

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> k;
    for (const auto& f : fields()) k.push_back(f.key);
    return k;
  }();
  return keys;
}

void apply_override(RunConfig& config, const std::string& key, const std::string& value) {
  for (const auto& f : fields()) {
    if (f.key == key) {
      f.set(config, trim(value));
      return;
    }
  }
  throw ConfigError("unknown key '" + key + "'");
}

RunConfig parse_config_text(const std::string& text, const std::string& source) {
  RunConfig config;
  std::istringstream in(text);
  std::string raw;
  std::string section;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto where = source + ":" + std::to_string(line_no) + ": ";
    std::string line = raw.substr(0, raw.find('#'));
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']' || line.size() < 3) throw ConfigError(where + "malformed section header '" + line + "'");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(where + "expected key = value, got '" + line + "'");
    auto key = trim(line.substr(0, eq));
    if (key.empty()) throw ConfigError(where + "missing key before '='");
    if (!section.empty()) key = section + "." + key;
    try {
      apply_override(config, key, line.substr(eq + 1));
    } catch (const ConfigError& e) {
      throw ConfigError(where + e.what());
    }
  }
  try {
    validate(config);
  } catch (const ConfigError& e) {
    throw ConfigError(source + ": " + e.what());
  }
  return config;
}

RunConfig parse_config(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot read config file " + path.string());
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_config_text(ss.str(), path.string());
}

std::string to_config_text(const RunConfig& config) {
  std::string out;
  for (const auto& [k, v] : config_entries(config)) out += k + " = " + v + "\n";
  return out;
}

std::string config_hash(const RunConfig& config) { return detail::hex64(detail::fnv1a(to_config_text(config))); }

}  // namespace demoforge
