#include "demoforge/demos/noise.hpp"

#include <cmath>
#include <random>

#include "demoforge/error.hpp"

namespace demoforge {

std::string to_string(NoiseFamily f) {
  switch (f) {
    case NoiseFamily::Gaussian:
      return "gaussian";
    case NoiseFamily::Laplacian:
      return "laplacian";
    case NoiseFamily::Uniform:
      return "uniform";
    case NoiseFamily::GaussianBiased:
      return "gaussian_biased";
    case NoiseFamily::UniformBiased:
      return "uniform_biased";
    case NoiseFamily::MixGaussUniform:
      return "mix_gauss_uniform";
    case NoiseFamily::MixGaussGauss:
      return "mix_gauss_gauss";
  }
  return "gaussian";
}

NoiseFamily noise_family_from_string(const std::string& s) {
  for (NoiseFamily f : kAllNoiseFamilies) {
    if (to_string(f) == s) return f;
  }
  throw InvalidSpecError("unknown noise family '" + s + "'");
}

void validate(const NoiseSpec& spec) {
  if (!(spec.p >= 0.0 && spec.p <= 1.0)) {
    throw InvalidSpecError("noise probability p must lie in [0,1], got " + std::to_string(spec.p));
  }
  if (!(spec.sigma > 0.0) || !std::isfinite(spec.sigma)) throw InvalidSpecError("noise sigma must be positive");
  if (!(spec.mix_weight >= 0.0 && spec.mix_weight <= 1.0)) {
    throw InvalidSpecError("mixture weight must lie in [0,1]");
  }
  if (!std::isfinite(spec.bias) || !std::isfinite(spec.mix_offset)) {
    throw InvalidSpecError("noise offsets must be finite");
  }
}

NoiseSampler::NoiseSampler(const NoiseSpec& spec) : spec_(spec) { validate(spec_); }

double NoiseSampler::gaussian(Rng& rng) const { return spec_.sigma * standard_normal(rng); }

double NoiseSampler::laplacian(Rng& rng) const {
  // Inverse CDF with scale b = sigma / sqrt(2).
  const double b = spec_.sigma / std::sqrt(2.0);
  const double u = uniform01(rng) - 0.5;
  const double mag = 1.0 - 2.0 * std::abs(u);
  if (mag <= 0.0) return 0.0;
  return -b * std::copysign(1.0, u) * std::log(mag);
}

double NoiseSampler::uniform(Rng& rng) const {
  const double a = spec_.sigma * std::sqrt(3.0);
  return a * (2.0 * uniform01(rng) - 1.0);
}

NoiseDraw NoiseSampler::draw(Rng& rng) const {
  switch (spec_.family) {
    case NoiseFamily::Gaussian:
      return {gaussian(rng), 0};
    case NoiseFamily::Laplacian:
      return {laplacian(rng), 0};
    case NoiseFamily::Uniform:
      return {uniform(rng), 0};
    case NoiseFamily::GaussianBiased:
      return {gaussian(rng) + spec_.bias, 0};
    case NoiseFamily::UniformBiased:
      return {uniform(rng) + spec_.bias, 0};
    case NoiseFamily::MixGaussUniform: {
      const bool first = uniform01(rng) < spec_.mix_weight;
      return first ? NoiseDraw{gaussian(rng), 0} : NoiseDraw{uniform(rng), 1};
    }
    case NoiseFamily::MixGaussGauss: {
      const bool first = uniform01(rng) < spec_.mix_weight;
      const double peak = first ? spec_.mix_offset : -spec_.mix_offset;
      return {peak + gaussian(rng), first ? 0 : 1};
    }
  }
  return {0.0, 0};
}

}  // namespace demoforge
