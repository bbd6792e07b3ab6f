#pragma once

#include <cmath>
#include <string>
#include <unordered_set>
#include <vector>

#include "pairlearn/common.hpp"
#include "pairlearn/linalg.hpp"

namespace pairlearn::kernels {

using linalg::EigenDecomposition;

/// Explicit pairwise Gram construction is gated behind this cap; it exists
/// only for small-scale verification oracles.
inline constexpr Index kDefaultPairCap = 4096;

/// Symmetric PSD Gram matrix with aligned entity identifiers. Symmetry is
/// validated on construction; the PSD check happens on the (single)
/// eigendecomposition, see decompose().
struct KernelMatrix {
  std::vector<std::string> ids;
  Matrix gram;

  Index size() const { return gram.rows(); }
};

/// Complete m x q dyad label matrix: rows are instances, columns are tasks.
/// Completeness (every pair observed exactly once) is what the closed forms
/// in this library require.
struct LabelMatrix {
  std::vector<std::string> instance_ids;
  std::vector<std::string> task_ids;
  Matrix values;

  Index instances() const { return values.rows(); }
  Index tasks() const { return values.cols(); }
};

namespace detail {

inline void check_unique(const std::vector<std::string>& ids, const std::string& what) {
  std::unordered_set<std::string> seen;
  for (const auto& id : ids)
    require(seen.insert(id).second, ErrorCode::IdCollision, what + ": duplicate id '" + id + "'");
}

inline std::vector<std::string> numbered_ids(const char* prefix, Index n) {
  std::vector<std::string> ids;
  ids.reserve(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) ids.push_back(prefix + std::to_string(i));
  return ids;
}

}  // namespace detail

inline KernelMatrix make_kernel_matrix(std::vector<std::string> ids, Matrix gram) {
  require(gram.rows() == gram.cols(), ErrorCode::NonSquareKernel,
          "kernel matrix must be square, got " + std::to_string(gram.rows()) + "x" +
              std::to_string(gram.cols()));
  require(static_cast<Index>(ids.size()) == gram.rows(), ErrorCode::DimensionMismatch,
          "kernel id count does not match matrix size");
  detail::check_unique(ids, "kernel ids");
  require_finite(gram, "kernel gram");
  const double scale = gram.size() == 0 ? 0.0 : gram.cwiseAbs().maxCoeff();
  if (scale > 0.0) {
    const double asym = (gram - gram.transpose()).cwiseAbs().maxCoeff();
    require(asym <= 1e-8 * scale, ErrorCode::AsymmetricInput,
            "kernel matrix asymmetry " + std::to_string(asym) + " beyond tolerance");
  }
  KernelMatrix k;
  k.ids = std::move(ids);
  k.gram = 0.5 * (gram + gram.transpose());
  return k;
}

inline KernelMatrix make_kernel_matrix(Matrix gram) {
  auto ids = detail::numbered_ids("e", gram.rows());
  return make_kernel_matrix(std::move(ids), std::move(gram));
}

inline LabelMatrix make_label_matrix(std::vector<std::string> instance_ids,
                                     std::vector<std::string> task_ids, Matrix values) {
  require(static_cast<Index>(instance_ids.size()) == values.rows(), ErrorCode::DimensionMismatch,
          "label instance id count does not match row count");
  require(static_cast<Index>(task_ids.size()) == values.cols(), ErrorCode::DimensionMismatch,
          "label task id count does not match column count");
  detail::check_unique(instance_ids, "instance ids");
  detail::check_unique(task_ids, "task ids");
  require_finite(values, "label matrix");
  return LabelMatrix{std::move(instance_ids), std::move(task_ids), std::move(values)};
}

inline LabelMatrix make_label_matrix(Matrix values) {
  auto instance_ids = detail::numbered_ids("d", values.rows());
  auto task_ids = detail::numbered_ids("t", values.cols());
  return make_label_matrix(std::move(instance_ids), std::move(task_ids), std::move(values));
}

/// What to do with negative eigenvalues beyond the PSD tolerance
/// -1e-9 * sigma_max: reject (default) or clamp them to 0 (--clip-spectrum).
enum class SpectrumPolicy { reject, clip };

/// Factorize a kernel matrix and enforce positive semi-definiteness. Negative
/// eigenvalues within tolerance are clamped to 0, so downstream code sees a
/// nonnegative spectrum.
inline EigenDecomposition decompose(const KernelMatrix& k,
                                    SpectrumPolicy policy = SpectrumPolicy::reject) {
  EigenDecomposition eig = linalg::sym_eig(k.gram);
  if (eig.size() == 0) return eig;
  const double vmax = std::max(0.0, eig.values.maxCoeff());
  const double tol = 1e-9 * (vmax > 0.0 ? vmax : 1.0);
  const double vmin = eig.values.minCoeff();
  if (vmin < -tol && policy == SpectrumPolicy::reject)
    fail(ErrorCode::NotPositiveSemiDefinite,
         "kernel has eigenvalue " + std::to_string(vmin) +
             " below PSD tolerance; pass --clip-spectrum to clamp");
  for (Index i = 0; i < eig.values.size(); ++i)
    if (eig.values[i] < 0.0) eig.values[i] = 0.0;
  return eig;
}

/// K + lambda*I with the same ids; used to express OKKLS with the shifted
/// pairwise kernel.
inline KernelMatrix shifted(const KernelMatrix& k, double lambda) {
  KernelMatrix out = k;
  out.gram += lambda * Matrix::Identity(k.size(), k.size());
  return out;
}

inline KernelMatrix gram_linear(const std::vector<std::vector<double>>& features,
                                std::vector<std::string> ids = {}) {
  const Index n = static_cast<Index>(features.size());
  const std::size_t dim = n == 0 ? 0 : features.front().size();
  for (const auto& row : features)
    require(row.size() == dim, ErrorCode::RaggedInput,
            "feature vectors must all have equal length");
  Matrix gram(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j <= i; ++j) {
      double dot = 0.0;
      for (std::size_t k = 0; k < dim; ++k)
        dot += features[static_cast<std::size_t>(i)][k] * features[static_cast<std::size_t>(j)][k];
      gram(i, j) = dot;
      gram(j, i) = dot;
    }
  if (ids.empty()) ids = detail::numbered_ids("e", n);
  return make_kernel_matrix(std::move(ids), std::move(gram));
}

inline KernelMatrix gram_linear(const Matrix& features, std::vector<std::string> ids = {}) {
  Matrix gram = features * features.transpose();
  if (ids.empty()) ids = detail::numbered_ids("e", features.rows());
  return make_kernel_matrix(std::move(ids), std::move(gram));
}

/// Radial basis kernel over precomputed distances: gram[i][j] = exp(-d_ij/scale).
inline KernelMatrix gram_rbf(const Matrix& distances, double scale,
                             std::vector<std::string> ids = {}) {
  require(scale > 0.0, ErrorCode::InvalidArgument, "rbf scale must be positive");
  require(distances.rows() == distances.cols(), ErrorCode::NonSquareKernel,
          "distance matrix must be square");
  require_finite(distances, "distance matrix");
  require(distances.size() == 0 || distances.minCoeff() >= 0.0, ErrorCode::NegativeDistance,
          "distances must be nonnegative");
  const double scale_abs = distances.size() == 0 ? 0.0 : distances.cwiseAbs().maxCoeff();
  if (scale_abs > 0.0) {
    const double asym = (distances - distances.transpose()).cwiseAbs().maxCoeff();
    require(asym <= 1e-8 * scale_abs, ErrorCode::AsymmetricInput,
            "distance matrix asymmetry beyond tolerance");
  }
  require(distances.rows() == 0 || distances.diagonal().cwiseAbs().maxCoeff() == 0.0,
          ErrorCode::InvalidArgument, "self-distances must be zero");
  Matrix gram = (-distances / scale).array().exp();
  if (ids.empty()) ids = detail::numbered_ids("e", distances.rows());
  return make_kernel_matrix(std::move(ids), std::move(gram));
}

namespace detail {
inline void check_pair_cap(Index m, Index q, Index cap, const char* op) {
  require(m * q <= cap, ErrorCode::SizeOverflow,
          std::string(op) + ": " + std::to_string(m * q) + " dyads exceed the cap of " +
              std::to_string(cap) + "; this operation exists for small-scale verification only");
}
}  // namespace detail

/// Explicit (q*m) x (q*m) pairwise Gram matrix G (x) K, laid out so that
/// entry (m*j + i, m*j' + i') = G[j][j'] * K[i][i'].
inline Matrix kron_gram(const KernelMatrix& g, const KernelMatrix& k,
                        Index cap = kDefaultPairCap) {
  detail::check_pair_cap(k.size(), g.size(), cap, "kron_gram");
  return linalg::kron_explicit(g.gram, k.gram);
}

/// The pairwise kernel matrix that casts two-step KRR as value-regularized
/// KRR with ridge parameter 1:
///   Xi = (G (x) K) (lambda_d*lambda_t I + lambda_t I (x) K + lambda_d G (x) I)^{-1},
/// evaluated in the joint eigenbasis: eigenvalues are
///   sigma_a s_b / (lambda_d*lambda_t + lambda_t*sigma_a + lambda_d*s_b).
inline Matrix xi_gram(const KernelMatrix& k, const KernelMatrix& g, double lambda_d,
                      double lambda_t, Index cap = kDefaultPairCap) {
  require(lambda_d > 0.0 && lambda_t > 0.0, ErrorCode::InvalidArgument,
          "xi_gram requires positive regularization parameters");
  detail::check_pair_cap(k.size(), g.size(), cap, "xi_gram");
  const EigenDecomposition ek = decompose(k);
  const EigenDecomposition eg = decompose(g);
  const Index m = k.size(), q = g.size();
  Vector xi(m * q);
  for (Index b = 0; b < q; ++b)
    for (Index a = 0; a < m; ++a) {
      const double sigma = ek.values[a], s = eg.values[b];
      xi[vec_index(a, b, m)] =
          sigma * s / (lambda_d * lambda_t + lambda_t * sigma + lambda_d * s);
    }
  const Matrix basis = linalg::kron_explicit(eg.vectors, ek.vectors);
  return basis * xi.asDiagonal() * basis.transpose();
}

/// Upsilon = (G + lambda_t I) (x) (K + lambda_d I): the delta-shifted
/// pairwise kernel restricted to the training pairs. Its ordinary
/// least-squares fit coincides with two-step KRR on fully unseen dyads.
inline Matrix upsilon_gram(const KernelMatrix& k, const KernelMatrix& g, double lambda_d,
                           double lambda_t, Index cap = kDefaultPairCap) {
  detail::check_pair_cap(k.size(), g.size(), cap, "upsilon_gram");
  return linalg::kron_explicit(shifted(g, lambda_t).gram, shifted(k, lambda_d).gram);
}

/// Rescore a binary label matrix so positives become N/N+ and negatives
/// -N/N-, with N = m*q. Makes squared-loss fitting equivalent to Fisher
/// discriminant analysis for classification. The output sums to zero.
inline LabelMatrix rescore_labels(const LabelMatrix& y) {
  Index pos = 0, neg = 0;
  for (Index i = 0; i < y.values.rows(); ++i)
    for (Index j = 0; j < y.values.cols(); ++j) {
      const double v = y.values(i, j);
      require(v == 0.0 || v == 1.0, ErrorCode::InvalidLabels,
              "rescore_labels expects binary labels, found " + std::to_string(v));
      (v == 1.0 ? pos : neg)++;
    }
  require(pos > 0 && neg > 0, ErrorCode::AllSameClass,
          "rescoring needs at least one positive and one negative label");
  const double n = static_cast<double>(pos + neg);
  const double up = n / static_cast<double>(pos);
  const double down = -n / static_cast<double>(neg);
  LabelMatrix out = y;
  for (Index i = 0; i < out.values.rows(); ++i)
    for (Index j = 0; j < out.values.cols(); ++j)
      out.values(i, j) = y.values(i, j) == 1.0 ? up : down;
  return out;
}

}  // namespace pairlearn::kernels
