#pragma once

#include <array>
#include <cstdint>
#include <string>

#include "demoforge/rng.hpp"

namespace demoforge {

enum class NoiseFamily {
  Gaussian,
  Laplacian,
  Uniform,
  GaussianBiased,
  UniformBiased,
  MixGaussUniform,
  MixGaussGauss,
};

inline constexpr std::array<NoiseFamily, 7> kAllNoiseFamilies = {
    NoiseFamily::Gaussian,       NoiseFamily::Laplacian,     NoiseFamily::Uniform,
    NoiseFamily::GaussianBiased, NoiseFamily::UniformBiased, NoiseFamily::MixGaussUniform,
    NoiseFamily::MixGaussGauss,
};

std::string to_string(NoiseFamily f);
NoiseFamily noise_family_from_string(const std::string& s);

/// Corruption process: each state (and independently each action) vector is
/// corrupted with probability p; a corrupted vector gets i.i.d. per-element
/// noise drawn from the family.
struct NoiseSpec {
  NoiseFamily family = NoiseFamily::Gaussian;
  double p = 0.2;
  double sigma = 1.0 / 6.0;
  double bias = 0.4;         // offset for the *_biased families
  double mix_weight = 0.5;   // probability of the first mixture component
  double mix_offset = 0.4;   // +/- peak location for mix_gauss_gauss
  std::uint64_t seed = 0;

  bool operator==(const NoiseSpec&) const = default;
};

/// Throws InvalidSpecError for p outside [0,1], non-positive sigma or a mixture
/// weight outside [0,1].
void validate(const NoiseSpec& spec);

struct NoiseDraw {
  double value = 0.0;
  int component = 0;  // mixture component (0 or 1); 0 for single-component families
};

/// Per-element noise sampler. Uniform ranges use a = sigma*sqrt(3) and the
/// Laplacian scale is sigma/sqrt(2), so every unbiased family has standard
/// deviation sigma.
class NoiseSampler {
 public:
  explicit NoiseSampler(const NoiseSpec& spec);
  NoiseDraw draw(Rng& rng) const;
  const NoiseSpec& spec() const { return spec_; }

 private:
  double gaussian(Rng& rng) const;
  double laplacian(Rng& rng) const;
  double uniform(Rng& rng) const;

  NoiseSpec spec_;
};

}  // namespace demoforge
