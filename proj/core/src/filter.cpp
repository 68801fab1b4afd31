#include "demoforge/filtering/filter.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "binary_io.hpp"
#include "demoforge/error.hpp"
#include "json.hpp"

namespace demoforge {

std::string to_string(FilterVariant v) {
  switch (v) {
    case FilterVariant::Random:
      return "random";
    case FilterVariant::AeOnly:
      return "ae_only";
    case FilterVariant::LofRaw:
      return "lof_raw";
    case FilterVariant::AeLof:
      return "ae_lof";
  }
  return "ae_lof";
}

FilterVariant filter_variant_from_string(const std::string& s) {
  for (auto v : {FilterVariant::Random, FilterVariant::AeOnly, FilterVariant::LofRaw, FilterVariant::AeLof}) {
    if (to_string(v) == s) return v;
  }
  throw ConfigError("unknown filter variant '" + s + "'");
}

namespace {

void check_fraction(double tau) {
  if (!(tau > 0.0 && tau < 1.0)) throw ConfigError("trusted fraction must lie in (0,1)");
}

}  // namespace

std::vector<std::uint8_t> rank_labels(const Vector& scores, double trusted_fraction) {
  check_fraction(trusted_fraction);
  const auto n = static_cast<std::size_t>(scores.size());
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scores(static_cast<Eigen::Index>(a)) < scores(static_cast<Eigen::Index>(b));
  });
  const auto keep = std::min(n, static_cast<std::size_t>(std::ceil(trusted_fraction * static_cast<double>(n) - 1e-9)));
  std::vector<std::uint8_t> labels(n, 0);
  for (std::size_t r = 0; r < keep; ++r) labels[order[r]] = 1;
  return labels;
}

std::array<std::vector<std::size_t>, 4> assemble_subsets(const std::vector<std::uint8_t>& state_clean,
                                                         const std::vector<std::uint8_t>& action_clean) {
  if (state_clean.size() != action_clean.size()) throw ShapeError("label vectors differ in length");
  std::array<std::vector<std::size_t>, 4> subsets;
  for (std::size_t i = 0; i < state_clean.size(); ++i) {
    Subset s;
    if (state_clean[i]) {
      s = action_clean[i] ? Subset::CleanPair : Subset::CleanStateNoisyAction;
    } else {
      s = action_clean[i] ? Subset::NoisyStateCleanAction : Subset::NoisyPair;
    }
    subsets[static_cast<std::size_t>(s)].push_back(i);
  }
  return subsets;
}

FilterResult partition(const Vector& state_scores, const Vector& action_scores, double trusted_fraction) {
  if (state_scores.size() != action_scores.size()) throw ConfigError("state and action score lengths differ");
  FilterResult r;
  r.trusted_fraction = trusted_fraction;
  r.state_scores = state_scores;
  r.action_scores = action_scores;
  r.state_clean = rank_labels(state_scores, trusted_fraction);
  r.action_clean = rank_labels(action_scores, trusted_fraction);
  r.subsets = assemble_subsets(r.state_clean, r.action_clean);
  return r;
}

FilterOutput filter_variant(const DemoSet& demos, const FilterConfig& config, std::uint64_t seed) {
  check_fraction(config.trusted_fraction);
  if (demos.empty()) throw EmptyBatchError("cannot filter an empty demo set");
  FilterOutput out;
  LofConfig lof = config.lof;
  lof.k = effective_neighbor_count(config.lof.k, demos.size());

  switch (config.variant) {
    case FilterVariant::Random: {
      Rng rng = make_rng(derive_seed(seed, "filter.random"));
      const auto n = static_cast<Eigen::Index>(demos.size());
      Vector us(n), ua(n);
      for (Eigen::Index i = 0; i < n; ++i) us(i) = uniform01(rng);
      for (Eigen::Index i = 0; i < n; ++i) ua(i) = uniform01(rng);
      FilterResult r;
      r.trusted_fraction = config.trusted_fraction;
      r.state_scores = us;
      r.action_scores = ua;
      for (Eigen::Index i = 0; i < n; ++i) {
        r.state_clean.push_back(us(i) < config.trusted_fraction ? 1 : 0);
        r.action_clean.push_back(ua(i) < config.trusted_fraction ? 1 : 0);
      }
      r.subsets = assemble_subsets(r.state_clean, r.action_clean);
      out.result = std::move(r);
      break;
    }
    case FilterVariant::LofRaw:
      out.result = partition(lof_scores(demos.states(), lof), lof_scores(demos.actions(), lof), config.trusted_fraction);
      break;
    case FilterVariant::AeOnly:
    case FilterVariant::AeLof: {
      auto ae = train_autoencoders(demos, config.autoencoder, derive_seed(seed, "filter.ae"));
      if (config.variant == FilterVariant::AeOnly) {
        out.result = partition(ae.state.reconstruction_error(demos.states()),
                               ae.action.reconstruction_error(demos.actions()), config.trusted_fraction);
      } else {
        const FeatureTable f = encode(ae, demos);
        out.result = partition(lof_scores(f.state_features, lof), lof_scores(f.action_features, lof),
                               config.trusted_fraction);
      }
      out.autoencoders = std::move(ae);
      break;
    }
  }
  out.result.variant = config.variant;
  return out;
}

double clean_set_precision(const std::vector<std::uint8_t>& clean_labels, const std::vector<std::uint8_t>& corrupted_mask) {
  if (clean_labels.size() != corrupted_mask.size()) throw ShapeError("label/mask length mismatch");
  std::size_t clean = 0, correct = 0;
  for (std::size_t i = 0; i < clean_labels.size(); ++i) {
    if (!clean_labels[i]) continue;
    ++clean;
    if (!corrupted_mask[i]) ++correct;
  }
  return clean == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(clean);
}

namespace {

std::string exact_decimal(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

nlohmann::ordered_json scores_json(const Vector& v) {
  auto arr = nlohmann::ordered_json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(exact_decimal(v(i)));
  return arr;
}

Vector scores_from_json(const nlohmann::json& arr) {
  Vector v(static_cast<Eigen::Index>(arr.size()));
  for (std::size_t i = 0; i < arr.size(); ++i) v(static_cast<Eigen::Index>(i)) = std::stod(arr[i].get<std::string>());
  return v;
}

}  // namespace

void save_filter_json(const std::filesystem::path& path, const FilterResult& r) {
  nlohmann::ordered_json j;
  j["variant"] = to_string(r.variant);
  j["trusted_fraction"] = r.trusted_fraction;
  auto bools = [](const std::vector<std::uint8_t>& v) {
    auto arr = nlohmann::ordered_json::array();
    for (auto b : v) arr.push_back(b != 0);
    return arr;
  };
  j["state_clean"] = bools(r.state_clean);
  j["action_clean"] = bools(r.action_clean);
  j["state_scores"] = scores_json(r.state_scores);
  j["action_scores"] = scores_json(r.action_scores);
  j["subsets"] = {{"clean_state_clean_action", r.subsets[0]},
                  {"clean_state_noisy_action", r.subsets[1]},
                  {"noisy_state_clean_action", r.subsets[2]},
                  {"noisy_state_noisy_action", r.subsets[3]}};
  detail::write_file(path.string(), j.dump(1) + "\n");
}

FilterResult load_filter_json(const std::filesystem::path& path) {
  try {
    const auto j = nlohmann::json::parse(detail::read_file(path.string()));
    FilterResult r;
    r.variant = filter_variant_from_string(j.at("variant").get<std::string>());
    r.trusted_fraction = j.at("trusted_fraction").get<double>();
    for (bool b : j.at("state_clean")) r.state_clean.push_back(b ? 1 : 0);
    for (bool b : j.at("action_clean")) r.action_clean.push_back(b ? 1 : 0);
    r.state_scores = scores_from_json(j.at("state_scores"));
    r.action_scores = scores_from_json(j.at("action_scores"));
    const auto& s = j.at("subsets");
    r.subsets[0] = s.at("clean_state_clean_action").get<std::vector<std::size_t>>();
    r.subsets[1] = s.at("clean_state_noisy_action").get<std::vector<std::size_t>>();
    r.subsets[2] = s.at("noisy_state_clean_action").get<std::vector<std::size_t>>();
    r.subsets[3] = s.at("noisy_state_noisy_action").get<std::vector<std::size_t>>();
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("malformed filter.json: " + std::string(e.what()));
  }
}

}  // namespace demoforge
