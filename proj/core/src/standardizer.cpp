#include "demoforge/nn/standardizer.hpp"

#include "demoforge/error.hpp"

namespace demoforge::nn {

Standardizer Standardizer::fit(const Matrix& samples) {
  if (samples.cols() == 0) throw EmptyBatchError("cannot fit a standardizer on zero samples");
  Standardizer s;
  s.mean = samples.rowwise().mean();
  const Matrix centered = samples.colwise() - s.mean;
  s.scale = (centered.array().square().rowwise().sum() / static_cast<double>(samples.cols())).sqrt();
  for (Eigen::Index i = 0; i < s.scale.size(); ++i) {
    if (!(s.scale(i) > 1e-8)) s.scale(i) = 1.0;
  }
  return s;
}

Standardizer Standardizer::identity(int dim) { return {Vector::Zero(dim), Vector::Ones(dim)}; }

Matrix Standardizer::apply(const Matrix& x) const {
  if (x.rows() != mean.size()) throw ShapeError("standardizer dimension mismatch");
  return (x.colwise() - mean).array().colwise() / scale.array();
}

Matrix Standardizer::invert(const Matrix& z) const {
  if (z.rows() != mean.size()) throw ShapeError("standardizer dimension mismatch");
  return (z.array().colwise() * scale.array()).matrix().colwise() + mean;
}

}  // namespace demoforge::nn
