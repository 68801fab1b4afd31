#pragma once

#include <filesystem>

#include "demoforge/demos/demo_set.hpp"

namespace demoforge {

inline constexpr const char* kDemoFormat = "demoforge-demo-1";

/// Single-file archive: 8-byte magic "DFDEMO01", u64 length of meta.json,
/// meta.json bytes, then the raw blocks listed in meta (trajectory lengths as
/// u32, states/actions/ground truth/masks as little-endian f32, column-major
/// per pair).
void save_demos(const std::filesystem::path& path, const DemoSet& demos);

/// Throws FormatError on a bad magic, unknown version or truncated block.
DemoSet load_demos(const std::filesystem::path& path);

}  // namespace demoforge
