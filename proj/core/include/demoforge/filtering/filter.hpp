#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "demoforge/filtering/autoencoder.hpp"
#include "demoforge/filtering/lof.hpp"

namespace demoforge {

enum class FilterVariant { Random, AeOnly, LofRaw, AeLof };

std::string to_string(FilterVariant v);
FilterVariant filter_variant_from_string(const std::string& s);

/// Indices into FilterResult::subsets.
enum class Subset : std::size_t {
  CleanPair = 0,          // D(s^, a^)
  CleanStateNoisyAction,  // D(s^, a')
  NoisyStateCleanAction,  // D(s', a^)
  NoisyPair,              // D(s', a')
};

struct FilterResult {
  FilterVariant variant = FilterVariant::AeLof;
  double trusted_fraction = 0.5;
  std::vector<std::uint8_t> state_clean;   // 1 = pseudo-labeled clean
  std::vector<std::uint8_t> action_clean;
  Vector state_scores;   // LOF (or the variant's outlier score); larger = more anomalous
  Vector action_scores;
  std::array<std::vector<std::size_t>, 4> subsets;

  const std::vector<std::size_t>& subset(Subset s) const { return subsets[static_cast<std::size_t>(s)]; }
  std::size_t size() const { return state_clean.size(); }
};

/// Labels the ceil(tau * N) lowest scores clean; ties at the cutoff go to the
/// lower pair index.
std::vector<std::uint8_t> rank_labels(const Vector& scores, double trusted_fraction);

/// Assigns every pair to exactly one subset from its two labels.
std::array<std::vector<std::size_t>, 4> assemble_subsets(const std::vector<std::uint8_t>& state_clean,
                                                         const std::vector<std::uint8_t>& action_clean);

/// Rank-based pseudo-labels for states and actions plus the four-way split.
/// Throws ConfigError when score lengths differ or tau is outside (0,1).
FilterResult partition(const Vector& state_scores, const Vector& action_scores, double trusted_fraction);

struct FilterConfig {
  FilterVariant variant = FilterVariant::AeLof;
  double trusted_fraction = 0.5;
  LofConfig lof;
  AutoencoderConfig autoencoder;
};

struct FilterOutput {
  FilterResult result;
  std::optional<AutoencoderPair> autoencoders;  // set for ae_only / ae_lof
};

/// random: Bernoulli(tau) labels; ae_only: rank by reconstruction error;
/// lof_raw: LOF on raw vectors; ae_lof: LOF on autoencoder bottleneck features.
/// The neighbor count is clamped with effective_neighbor_count.
FilterOutput filter_variant(const DemoSet& demos, const FilterConfig& config, std::uint64_t seed);

/// Fraction of labeled-clean entries whose corruption mask is unset.
double clean_set_precision(const std::vector<std::uint8_t>& clean_labels, const std::vector<std::uint8_t>& corrupted_mask);

/// `filter.json`: labels, scores as round-trip decimal strings, tau, variant
/// and the four subset index lists.
void save_filter_json(const std::filesystem::path& path, const FilterResult& result);
FilterResult load_filter_json(const std::filesystem::path& path);

}  // namespace demoforge
