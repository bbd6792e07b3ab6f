#pragma once

#include <random>

#include "pairlearn/common.hpp"
#include "pairlearn/kernels.hpp"

namespace testutil {

using pairlearn::Index;
using pairlearn::Matrix;
using pairlearn::Vector;

inline std::mt19937_64 rng(std::uint64_t seed) { return std::mt19937_64(seed); }

inline Matrix random_matrix(std::mt19937_64& gen, Index rows, Index cols, double lo = -1.0,
                            double hi = 1.0) {
  std::uniform_real_distribution<double> dist(lo, hi);
  Matrix m(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) m(i, j) = dist(gen);
  return m;
}

// Random Gram construction: X X^T with a few extra columns, full rank w.h.p.
inline Matrix random_psd(std::mt19937_64& gen, Index n) {
  Matrix x = random_matrix(gen, n, n + 2);
  Matrix g = x * x.transpose();
  return 0.5 * (g + g.transpose());
}

inline pairlearn::kernels::KernelMatrix random_kernel(std::mt19937_64& gen, Index n,
                                                      const char* prefix = "e") {
  Matrix g = random_psd(gen, n);
  std::vector<std::string> ids;
  for (Index i = 0; i < n; ++i) ids.push_back(prefix + std::to_string(i));
  return pairlearn::kernels::make_kernel_matrix(std::move(ids), std::move(g));
}

// Relative Frobenius error against the reference; absolute when the
// reference is (near) zero.
inline double rel_err(const Matrix& actual, const Matrix& expected) {
  const double ref = expected.norm();
  return (actual - expected).norm() / (ref > 1e-9 ? ref : 1.0);
}

inline double rel_err(double actual, double expected) {
  const double ref = std::abs(expected);
  return std::abs(actual - expected) / (ref > 1e-9 ? ref : 1.0);
}

// Independent Kronecker product oracle via the 4-index formula.
inline Matrix naive_kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j)
      for (Index k = 0; k < b.rows(); ++k)
        for (Index l = 0; l < b.cols(); ++l)
          out(i * b.rows() + k, j * b.cols() + l) = a(i, j) * b(k, l);
  return out;
}

}  // namespace testutil
