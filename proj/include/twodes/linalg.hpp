// linalg.hpp - fixed-size complex matrix aliases and vectorization helpers
#pragma once

#include <Eigen/Dense>
#include <complex>

namespace twodes {

using Complex = std::complex<double>;
using Matrix2c = Eigen::Matrix2cd;
using Matrix4c = Eigen::Matrix4cd;
using Vector4c = Eigen::Vector4cd;
using Matrix16c = Eigen::Matrix<Complex, 16, 16>;
using Vector16c = Eigen::Matrix<Complex, 16, 1>;
using RowVector16c = Eigen::Matrix<Complex, 1, 16>;
// A bundle of density-matrix columns propagated under one shared generator.
using Block16c = Eigen::Matrix<Complex, 16, Eigen::Dynamic>;

inline constexpr Complex ii{0.0, 1.0};

// Column-stacking vectorization: vec(rho)[r + 4c] = rho(r, c).
inline Vector16c vec(const Matrix4c& m) {
  Vector16c v;
  for (int c = 0; c < 4; ++c)
    for (int r = 0; r < 4; ++r) v(r + 4 * c) = m(r, c);
  return v;
}

inline Matrix4c unvec(const Vector16c& v) {
  Matrix4c m;
  for (int c = 0; c < 4; ++c)
    for (int r = 0; r < 4; ++r) m(r, c) = v(r + 4 * c);
  return m;
}

inline Matrix4c dag(const Matrix4c& m) { return m.adjoint(); }

template <typename Derived>
double fro_norm(const Eigen::MatrixBase<Derived>& m) {
  return m.norm();
}

}  // namespace twodes
