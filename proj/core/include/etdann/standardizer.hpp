#pragma once

#include "etdann/matrix.hpp"

namespace etdann {

// Per-column z-scoring with population (1/n) statistics.
class Standardizer {
 public:
  Standardizer() = default;

  // Throws ZeroVariance if any column has std < 1e-12, TooFewSamples if
  // x has fewer than 2 rows.
  static Standardizer fit(const Matrix& x);

  bool fitted() const noexcept { return fitted_; }
  const Vector& mean() const noexcept { return mean_; }
  const Vector& stddev() const noexcept { return stddev_; }
  Eigen::Index width() const noexcept { return mean_.size(); }

  Matrix transform(const Matrix& x) const;
  Matrix inverse_transform(const Matrix& z) const;

 private:
  void check(const Matrix& x) const;

  Vector mean_;
  Vector stddev_;
  bool fitted_ = false;
};

inline Standardizer fit_standardizer(const Matrix& x) { return Standardizer::fit(x); }
inline Matrix standardize(const Standardizer& s, const Matrix& x) { return s.transform(x); }

}  // namespace etdann
