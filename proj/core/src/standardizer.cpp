#include "etdann/standardizer.hpp"

#include <cmath>
#include <string>

#include "etdann/error.hpp"

namespace etdann {

Standardizer Standardizer::fit(const Matrix& x) {
  if (x.rows() < 2) throw Error(ErrorCode::TooFewSamples, "standardizer needs >= 2 rows");
  if (!x.allFinite()) throw Error(ErrorCode::NonFiniteInput, "standardizer input");
  Standardizer s;
  const double n = static_cast<double>(x.rows());
  s.mean_ = x.colwise().sum().transpose() / n;
  s.stddev_.resize(x.cols());
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    const double var = (x.col(j).array() - s.mean_(j)).square().sum() / n;
    const double sd = std::sqrt(var);
    if (sd < 1e-12) throw Error(ErrorCode::ZeroVariance, "column " + std::to_string(j));
    s.stddev_(j) = sd;
  }
  s.fitted_ = true;
  return s;
}

void Standardizer::check(const Matrix& x) const {
  if (!fitted_) throw Error(ErrorCode::NotFitted, "standardizer used before fit");
  if (x.cols() != mean_.size())
    throw Error(ErrorCode::DimensionMismatch, "expected " + std::to_string(mean_.size()) +
                                                  " columns, got " + std::to_string(x.cols()));
}

Matrix Standardizer::transform(const Matrix& x) const {
  check(x);
  Matrix z = (x.rowwise() - mean_.transpose()).array().rowwise() / stddev_.transpose().array();
  if (!z.allFinite()) throw Error(ErrorCode::NonFiniteInput, "standardized output not finite");
  return z;
}

Matrix Standardizer::inverse_transform(const Matrix& z) const {
  check(z);
  Matrix x = (z.array().rowwise() * stddev_.transpose().array()).matrix();
  x.rowwise() += mean_.transpose();
  return x;
}

}  // namespace etdann
