#pragma once

#include <Eigen/Eigenvalues>

#include <atomic>
#include <cmath>
#include <cstdint>
#include <string>

#include "pairlearn/common.hpp"

namespace pairlearn::linalg {

/// Orthonormal eigenvectors (columns) and eigenvalues in ascending order.
struct EigenDecomposition {
  Matrix vectors;
  Vector values;

  Index size() const { return values.size(); }
};

namespace detail {
inline std::atomic<std::uint64_t>& sym_eig_counter() {
  static std::atomic<std::uint64_t> counter{0};
  return counter;
}
}  // namespace detail

/// Number of sym_eig calls since process start. Used to verify that grid
/// search factorizes each kernel exactly once.
inline std::uint64_t sym_eig_count() { return detail::sym_eig_counter().load(); }

/// Symmetric eigendecomposition of M. The input is symmetrized as
/// (M + M^T)/2 before factoring; asymmetry beyond 1e-8 * max|M| is an error.
/// Eigenvalues with |sigma| < 1e-12 * sigma_max are clamped to exactly 0 so
/// rank deficiency is explicit downstream.
inline EigenDecomposition sym_eig(const Matrix& m) {
  require(m.rows() == m.cols(), ErrorCode::NonSquare,
          "sym_eig expects a square matrix, got " + std::to_string(m.rows()) + "x" +
              std::to_string(m.cols()));
  require_finite(m, "sym_eig input");

  const double scale = m.cwiseAbs().maxCoeff();
  if (m.rows() > 0 && scale > 0.0) {
    const double asym = (m - m.transpose()).cwiseAbs().maxCoeff();
    require(asym <= 1e-8 * scale, ErrorCode::ExcessiveAsymmetry,
            "max |M - M^T| = " + std::to_string(asym) + " exceeds tolerance");
  }

  Matrix sym = 0.5 * (m + m.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> solver(sym);
  if (solver.info() != Eigen::Success)
    fail(ErrorCode::ConvergenceFailure, "eigendecomposition did not converge");

  EigenDecomposition eig;
  eig.vectors = solver.eigenvectors();
  eig.values = solver.eigenvalues();
  if (eig.values.size() > 0) {
    const double vmax = eig.values.cwiseAbs().maxCoeff();
    const double tiny = 1e-12 * vmax;
    for (Index i = 0; i < eig.values.size(); ++i)
      if (std::abs(eig.values[i]) < tiny) eig.values[i] = 0.0;
  }
  detail::sym_eig_counter().fetch_add(1);
  return eig;
}

inline Matrix reconstruct(const EigenDecomposition& eig) {
  return eig.vectors * eig.values.asDiagonal() * eig.vectors.transpose();
}

/// left * x * right without forming any Kronecker product; equals
/// mat((right^T (x) left) vec(x)).
inline Matrix kron_apply(const Matrix& left, const Matrix& x, const Matrix& right) {
  require(left.cols() == x.rows() && x.cols() == right.rows(), ErrorCode::DimensionMismatch,
          "kron_apply: nonconformable shapes");
  return left * x * right;
}

/// Explicit Kronecker product A (x) B. Only for small-scale oracle work; the
/// production paths never materialize one.
inline Matrix kron_explicit(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

inline Matrix ew_multiply(const Matrix& a, const Matrix& b) {
  require(a.rows() == b.rows() && a.cols() == b.cols(), ErrorCode::DimensionMismatch,
          "elementwise multiply: shape mismatch");
  return a.cwiseProduct(b);
}

inline Matrix ew_divide(const Matrix& a, const Matrix& b) {
  require(a.rows() == b.rows() && a.cols() == b.cols(), ErrorCode::DimensionMismatch,
          "elementwise divide: shape mismatch");
  require(b.cwiseAbs().minCoeff() > 1e-300, ErrorCode::DivisionByNearZero,
          "elementwise divide: divisor magnitude below 1e-300");
  return a.cwiseQuotient(b);
}

inline Matrix ew_divide(const Matrix& a, double b) {
  require(std::abs(b) > 1e-300, ErrorCode::DivisionByNearZero,
          "elementwise divide: scalar divisor magnitude below 1e-300");
  return a / b;
}

/// 1 / (v + shift), the Tikhonov-style reciprocal used all over the filters.
inline Vector reciprocal_shift(const Vector& values, double shift) {
  Vector out(values.size());
  for (Index i = 0; i < values.size(); ++i) {
    const double denom = values[i] + shift;
    require(std::abs(denom) > 1e-300, ErrorCode::DivisionByNearZero,
            "reciprocal_shift: value + shift is zero at index " + std::to_string(i));
    out[i] = 1.0 / denom;
  }
  return out;
}

}  // namespace pairlearn::linalg
