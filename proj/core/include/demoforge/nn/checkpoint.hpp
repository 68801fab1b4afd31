#pragma once

#include <filesystem>
#include <map>
#include <string>

#include "demoforge/nn/mlp.hpp"

namespace demoforge::nn {

inline constexpr const char* kCheckpointFormat = "demoforge-ckpt-1";

struct Checkpoint {
  std::string role;
  MlpModel model;
  std::map<std::string, std::string> attributes;  // role-specific metadata
};

/// Writes `manifest.json` + `params.bin` (little-endian f32, row-major,
/// concatenated in manifest order) into dir, creating it if needed.
void save_checkpoint(const std::filesystem::path& dir, const Checkpoint& ckpt);

/// Throws FormatError on an unknown format version or inconsistent tensors.
Checkpoint load_checkpoint(const std::filesystem::path& dir);

/// FNV-1a 64 over the serialized parameter bytes, hex encoded.
std::string parameter_checksum(const MlpModel& model);

}  // namespace demoforge::nn
