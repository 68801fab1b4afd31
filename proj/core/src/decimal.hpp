#pragma once

// Round-trip decimal encoding for doubles and vectors stored in text metadata.

#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

#include "demoforge/error.hpp"
#include "demoforge/nn/mlp.hpp"

namespace demoforge::detail {

inline std::string exact_decimal(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline std::string encode_vector(const nn::Vector& v) {
  std::string out;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (i) out += ',';
    out += exact_decimal(v(i));
  }
  return out;
}

inline nn::Vector decode_vector(const std::string& s) {
  std::vector<double> vals;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      vals.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw FormatError("bad decimal '" + item + "'");
    }
  }
  return Eigen::Map<nn::Vector>(vals.data(), static_cast<Eigen::Index>(vals.size()));
}

}  // namespace demoforge::detail
