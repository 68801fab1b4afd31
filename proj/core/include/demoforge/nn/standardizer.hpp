#pragma once

#include "demoforge/nn/mlp.hpp"

namespace demoforge::nn {

/// Per-coordinate affine normalization fitted on a column sample set.
struct Standardizer {
  Vector mean;
  Vector scale;  // population std; 1 for near-constant coordinates

  static Standardizer fit(const Matrix& samples);
  static Standardizer identity(int dim);

  Matrix apply(const Matrix& x) const;
  Matrix invert(const Matrix& z) const;
  int dim() const { return static_cast<int>(mean.size()); }
};

}  // namespace demoforge::nn
