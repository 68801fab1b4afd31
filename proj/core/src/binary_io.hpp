#pragma once

// Little-endian helpers shared by the checkpoint and demo archive writers.

#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

namespace demoforge::detail {

static_assert(std::endian::native == std::endian::little, "demoforge file formats assume a little-endian host");

inline void append_f32(std::string& buf, double v) {
  const float f = static_cast<float>(v);
  char bytes[4];
  std::memcpy(bytes, &f, 4);
  buf.append(bytes, 4);
}

inline void append_u32(std::string& buf, std::uint32_t v) {
  char bytes[4];
  std::memcpy(bytes, &v, 4);
  buf.append(bytes, 4);
}

inline void append_u64(std::string& buf, std::uint64_t v) {
  char bytes[8];
  std::memcpy(bytes, &v, 8);
  buf.append(bytes, 8);
}

inline float read_f32(const char* p) {
  float f;
  std::memcpy(&f, p, 4);
  return f;
}

inline std::uint32_t read_u32(const char* p) {
  std::uint32_t v;
  std::memcpy(&v, p, 4);
  return v;
}

inline std::uint64_t read_u64(const char* p) {
  std::uint64_t v;
  std::memcpy(&v, p, 8);
  return v;
}

inline std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& bytes);
std::string hex64(std::uint64_t v);

}  // namespace demoforge::detail
