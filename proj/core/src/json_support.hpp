#pragma once

// JSON conversions for library value types; private to the core library.

#include "demoforge/demos/noise.hpp"
#include "json.hpp"

namespace demoforge::detail {

inline nlohmann::ordered_json noise_to_json(const NoiseSpec& n) {
  return {{"family", to_string(n.family)}, {"p", n.p},
          {"sigma", n.sigma},              {"bias", n.bias},
          {"mix_weight", n.mix_weight},    {"mix_offset", n.mix_offset},
          {"seed", n.seed}};
}

inline NoiseSpec noise_from_json(const nlohmann::json& j) {
  NoiseSpec n;
  n.family = noise_family_from_string(j.at("family").get<std::string>());
  n.p = j.at("p").get<double>();
  n.sigma = j.at("sigma").get<double>();
  n.bias = j.at("bias").get<double>();
  n.mix_weight = j.at("mix_weight").get<double>();
  n.mix_offset = j.at("mix_offset").get<double>();
  n.seed = j.at("seed").get<std::uint64_t>();
  return n;
}

}  // namespace demoforge::detail
