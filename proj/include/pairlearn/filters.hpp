#pragma once

#include <cmath>
#include <optional>
#include <string>

#include "pairlearn/common.hpp"
#include "pairlearn/linalg.hpp"

namespace pairlearn::filters {

using linalg::EigenDecomposition;

/// Spectral filter choices. The enumeration is deliberately extensible
/// (spectral cut-off, iterated Tikhonov, boosting filters would slot in
/// here) but only the three regularizers below are implemented.
struct FilterSpec {
  enum class Kind { tikhonov, kronecker_tikhonov, two_step };

  Kind kind = Kind::tikhonov;
  double lambda = 0.0;    // tikhonov / kronecker_tikhonov
  double lambda_d = 0.0;  // two_step
  double lambda_t = 0.0;  // two_step

  static FilterSpec tikhonov(double lambda) {
    FilterSpec f;
    f.kind = Kind::tikhonov;
    f.lambda = lambda;
    return f;
  }
  static FilterSpec kronecker_tikhonov(double lambda) {
    FilterSpec f;
    f.kind = Kind::kronecker_tikhonov;
    f.lambda = lambda;
    return f;
  }
  static FilterSpec two_step(double lambda_d, double lambda_t) {
    FilterSpec f;
    f.kind = Kind::two_step;
    f.lambda_d = lambda_d;
    f.lambda_t = lambda_t;
    return f;
  }
};

namespace detail {
inline double tikhonov_value(double sigma, double lambda) {
  const double denom = sigma + lambda;
  require(denom > 1e-300, ErrorCode::ZeroDivisor,
          "Tikhonov filter undefined: eigenvalue " + std::to_string(sigma) +
              " with lambda " + std::to_string(lambda));
  return 1.0 / denom;
}
}  // namespace detail

/// Evaluate the filter at instance eigenvalue sigma and (for the pairwise
/// kinds) task eigenvalue s. The two-step filter is computed literally as the
/// product of the two Tikhonov factors, so the factorization identity holds
/// exactly.
inline double apply_filter(const FilterSpec& spec, double sigma,
                           std::optional<double> s = std::nullopt) {
  require(sigma >= 0.0 && (!s || *s >= 0.0), ErrorCode::InvalidArgument,
          "filters expect nonnegative eigenvalues");
  switch (spec.kind) {
    case FilterSpec::Kind::tikhonov:
      return detail::tikhonov_value(sigma, spec.lambda);
    case FilterSpec::Kind::kronecker_tikhonov: {
      require(s.has_value(), ErrorCode::InvalidArgument,
              "kronecker_tikhonov filter needs a task eigenvalue");
      const double denom = sigma * (*s) + spec.lambda;
      require(denom > 1e-300, ErrorCode::ZeroDivisor,
              "Kronecker filter undefined: product eigenvalue zero with lambda zero");
      return 1.0 / denom;
    }
    case FilterSpec::Kind::two_step:
      require(s.has_value(), ErrorCode::InvalidArgument,
              "two_step filter needs a task eigenvalue");
      return detail::tikhonov_value(sigma, spec.lambda_d) *
             detail::tikhonov_value(*s, spec.lambda_t);
  }
  fail(ErrorCode::InvalidArgument, "unknown filter kind");
}

/// Hat matrix K(K + lambda I)^{-1} = U diag(sigma/(sigma+lambda)) U^T.
/// Symmetric with eigenvalues in [0, 1) for lambda > 0.
inline Matrix hat_matrix(const EigenDecomposition& eig, double lambda) {
  Vector h(eig.size());
  for (Index a = 0; a < eig.size(); ++a)
    h[a] = eig.values[a] * detail::tikhonov_value(eig.values[a], lambda);
  return eig.vectors * h.asDiagonal() * eig.vectors.transpose();
}

/// Pairwise filtered eigenvalue grid: Psi[a][b] = sigma_a s_b * filter(sigma_a, s_b).
inline Matrix filtered_grid(const EigenDecomposition& ek, const EigenDecomposition& eg,
                            const FilterSpec& spec) {
  Matrix psi(ek.size(), eg.size());
  for (Index a = 0; a < ek.size(); ++a)
    for (Index b = 0; b < eg.size(); ++b)
      psi(a, b) = ek.values[a] * eg.values[b] * apply_filter(spec, ek.values[a], eg.values[b]);
  return psi;
}

/// mat(H vec(Y)) for the pairwise hat matrix of the given filter, computed as
/// U (Psi o (U^T Y V)) V^T. H itself is never materialized.
inline Matrix pairwise_hat_action(const EigenDecomposition& ek, const EigenDecomposition& eg,
                                  const FilterSpec& spec, const Matrix& y) {
  require(y.rows() == ek.size() && y.cols() == eg.size(), ErrorCode::DimensionMismatch,
          "pairwise_hat_action: label shape does not match eigendecompositions");
  const Matrix psi = filtered_grid(ek, eg, spec);
  const Matrix c = ek.vectors.transpose() * y * eg.vectors;
  return ek.vectors * psi.cwiseProduct(c) * eg.vectors.transpose();
}

/// Diagonal of the pairwise hat matrix, reshaped to m x q:
/// D[i][j] = sum_ab U[i][a]^2 V[j][b]^2 Psi[a][b], computed as
/// (U o U) Psi (V o V)^T in O(mq) memory.
inline Matrix pairwise_hat_diag(const EigenDecomposition& ek, const EigenDecomposition& eg,
                                const FilterSpec& spec) {
  const Matrix psi = filtered_grid(ek, eg, spec);
  const Matrix u2 = ek.vectors.cwiseProduct(ek.vectors);
  const Matrix v2 = eg.vectors.cwiseProduct(eg.vectors);
  return u2 * psi * v2.transpose();
}

}  // namespace pairlearn::filters
