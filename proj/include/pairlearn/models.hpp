#pragma once

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "pairlearn/common.hpp"
#include "pairlearn/kernels.hpp"
#include "pairlearn/linalg.hpp"

namespace pairlearn::models {

using kernels::KernelMatrix;
using kernels::LabelMatrix;
using kernels::SpectrumPolicy;
using linalg::EigenDecomposition;

enum class Variant { IT, KK, OKKLS, TS };

inline const char* variant_name(Variant v) {
  switch (v) {
    case Variant::IT: return "it";
    case Variant::KK: return "kk";
    case Variant::OKKLS: return "okkls";
    case Variant::TS: return "ts";
  }
  return "?";
}

/// Dual parameter matrix A (m x q) plus the hyperparameters and training ids
/// it was fit with. Unused lambda fields are zero.
struct DualModel {
  Variant variant = Variant::TS;
  Matrix params;
  double lambda_d = 0.0;
  double lambda_t = 0.0;
  double lambda = 0.0;
  std::vector<std::string> instance_ids;
  std::vector<std::string> task_ids;
};

namespace detail {

inline void check_alignment(const std::vector<std::string>& kernel_ids,
                            const std::vector<std::string>& label_ids, const char* what) {
  require(kernel_ids == label_ids, ErrorCode::IdMismatch,
          std::string(what) + " kernel ids do not match label ids (align the bundle first)");
}

inline void check_full_rank(const Vector& values, const char* what) {
  for (Index i = 0; i < values.size(); ++i)
    require(values[i] > 0.0, ErrorCode::SingularSystem,
            std::string(what) + ": lambda = 0 on a rank-deficient kernel");
}

/// U diag(1/(sigma+lambda)) U^T * Y, the (K + lambda I)^{-1} Y solve through
/// the eigendecomposition.
inline Matrix shifted_inverse_apply(const EigenDecomposition& eig, const Matrix& y,
                                    double lambda) {
  if (lambda == 0.0) check_full_rank(eig.values, "solve");
  const Vector inv = linalg::reciprocal_shift(eig.values, lambda);
  return eig.vectors * inv.asDiagonal() * (eig.vectors.transpose() * y);
}

}  // namespace detail

/// Independent-task KRR: solves (K + lambda_d I) A = Y, one ridge model per
/// task sharing the instance kernel.
inline DualModel fit_it(const EigenDecomposition& ek, const LabelMatrix& y, double lambda_d) {
  require(ek.size() == y.instances(), ErrorCode::DimensionMismatch,
          "fit_it: kernel size does not match label rows");
  require(lambda_d >= 0.0, ErrorCode::InvalidArgument, "lambda_d must be nonnegative");
  DualModel model;
  model.variant = Variant::IT;
  model.lambda_d = lambda_d;
  model.params = detail::shifted_inverse_apply(ek, y.values, lambda_d);
  model.instance_ids = y.instance_ids;
  model.task_ids = y.task_ids;
  return model;
}

inline DualModel fit_it(const KernelMatrix& k, const LabelMatrix& y, double lambda_d) {
  detail::check_alignment(k.ids, y.instance_ids, "instance");
  return fit_it(kernels::decompose(k), y, lambda_d);
}

/// Kronecker kernel ridge regression: solves (G (x) K + lambda I) vec(A) = vec(Y)
/// through the factor eigendecompositions, never forming the pairwise system.
inline DualModel fit_kk(const EigenDecomposition& ek, const EigenDecomposition& eg,
                        const LabelMatrix& y, double lambda) {
  require(ek.size() == y.instances() && eg.size() == y.tasks(), ErrorCode::DimensionMismatch,
          "fit_kk: kernel sizes do not match labels");
  require(lambda >= 0.0, ErrorCode::InvalidArgument, "lambda must be nonnegative");
  Matrix c = ek.vectors.transpose() * y.values * eg.vectors;
  for (Index a = 0; a < ek.size(); ++a)
    for (Index b = 0; b < eg.size(); ++b) {
      const double denom = ek.values[a] * eg.values[b] + lambda;
      require(denom > 1e-300, ErrorCode::SingularSystem,
              "fit_kk: zero pairwise eigenvalue with lambda = 0");
      c(a, b) /= denom;
    }
  DualModel model;
  model.variant = Variant::KK;
  model.lambda = lambda;
  model.params = ek.vectors * c * eg.vectors.transpose();
  model.instance_ids = y.instance_ids;
  model.task_ids = y.task_ids;
  return model;
}

inline DualModel fit_kk(const KernelMatrix& k, const KernelMatrix& g, const LabelMatrix& y,
                        double lambda) {
  detail::check_alignment(k.ids, y.instance_ids, "instance");
  detail::check_alignment(g.ids, y.task_ids, "task");
  return fit_kk(kernels::decompose(k), kernels::decompose(g), y, lambda);
}

/// Ordinary Kronecker kernel least-squares: fit_kk with lambda = 0. Pass the
/// shifted grams (K + lambda_d I, G + lambda_t I) to express OKKLS with the
/// delta-shifted pairwise kernel Upsilon.
inline DualModel fit_okkls(const KernelMatrix& k, const KernelMatrix& g, const LabelMatrix& y) {
  DualModel model = fit_kk(k, g, y, 0.0);
  model.variant = Variant::OKKLS;
  return model;
}

/// Two-step KRR: A = (K + lambda_d I)^{-1} Y (G + lambda_t I)^{-1}, two
/// chained ridge regressions computed in the factor eigenbases.
inline DualModel fit_ts(const EigenDecomposition& ek, const EigenDecomposition& eg,
                        const LabelMatrix& y, double lambda_d, double lambda_t) {
  require(ek.size() == y.instances() && eg.size() == y.tasks(), ErrorCode::DimensionMismatch,
          "fit_ts: kernel sizes do not match labels");
  require(lambda_d >= 0.0 && lambda_t >= 0.0, ErrorCode::InvalidArgument,
          "regularization parameters must be nonnegative");
  Matrix left = detail::shifted_inverse_apply(ek, y.values, lambda_d);
  if (lambda_t == 0.0) detail::check_full_rank(eg.values, "solve");
  const Vector inv = linalg::reciprocal_shift(eg.values, lambda_t);
  DualModel model;
  model.variant = Variant::TS;
  model.lambda_d = lambda_d;
  model.lambda_t = lambda_t;
  model.params = (left * eg.vectors) * inv.asDiagonal() * eg.vectors.transpose();
  model.instance_ids = y.instance_ids;
  model.task_ids = y.task_ids;
  return model;
}

inline DualModel fit_ts(const KernelMatrix& k, const KernelMatrix& g, const LabelMatrix& y,
                        double lambda_d, double lambda_t) {
  detail::check_alignment(k.ids, y.instance_ids, "instance");
  detail::check_alignment(g.ids, y.task_ids, "task");
  return fit_ts(kernels::decompose(k), kernels::decompose(g), y, lambda_d, lambda_t);
}

/// Predict F = k_test A g_test^T. k_test rows are instance-kernel evaluations
/// against the m training instances; g_test rows are task-kernel evaluations
/// against the q training tasks. An IT model only supports training tasks, so
/// its g_test rows must be one-hot selectors.
inline Matrix predict(const DualModel& model, const Matrix& k_test, const Matrix& g_test) {
  require(k_test.cols() == model.params.rows(), ErrorCode::DimensionMismatch,
          "predict: k_test columns must equal the training instance count");
  require(g_test.cols() == model.params.cols(), ErrorCode::DimensionMismatch,
          "predict: g_test columns must equal the training task count");
  if (model.variant == Variant::IT) {
    for (Index r = 0; r < g_test.rows(); ++r) {
      Index ones = 0;
      bool selector = true;
      for (Index c = 0; c < g_test.cols(); ++c) {
        if (g_test(r, c) == 1.0)
          ++ones;
        else if (g_test(r, c) != 0.0)
          selector = false;
      }
      require(selector && ones == 1, ErrorCode::ITNewTask,
              "an independent-task model cannot predict for unseen tasks; "
              "g_test row " + std::to_string(r) + " is not a training-task selector");
    }
  }
  return k_test * model.params * g_test.transpose();
}

/// Identity selector rows for predicting training tasks (or instances).
inline Matrix selector_rows(const std::vector<Index>& picks, Index n) {
  Matrix rows = Matrix::Zero(static_cast<Index>(picks.size()), n);
  for (Index r = 0; r < rows.rows(); ++r) {
    require(picks[static_cast<std::size_t>(r)] >= 0 && picks[static_cast<std::size_t>(r)] < n,
            ErrorCode::DimensionMismatch, "selector index out of range");
    rows(r, picks[static_cast<std::size_t>(r)]) = 1.0;
  }
  return rows;
}

/// Caches one eigendecomposition per kernel matrix so a whole hyperparameter
/// grid costs O(m^2 q + m q^2) per point after the O(m^3 + q^3) setup.
class FitSession {
 public:
  FitSession(KernelMatrix k, KernelMatrix g, LabelMatrix y,
             SpectrumPolicy policy = SpectrumPolicy::reject)
      : k_(std::move(k)), g_(std::move(g)), y_(std::move(y)) {
    detail::check_alignment(k_.ids, y_.instance_ids, "instance");
    detail::check_alignment(g_.ids, y_.task_ids, "task");
    ek_ = kernels::decompose(k_, policy);
    eg_ = kernels::decompose(g_, policy);
  }

  const KernelMatrix& instance_kernel() const { return k_; }
  const KernelMatrix& task_kernel() const { return g_; }
  const LabelMatrix& labels() const { return y_; }
  const EigenDecomposition& instance_eig() const { return ek_; }
  const EigenDecomposition& task_eig() const { return eg_; }

  DualModel fit_it(double lambda_d) const { return models::fit_it(ek_, y_, lambda_d); }
  DualModel fit_kk(double lambda) const { return models::fit_kk(ek_, eg_, y_, lambda); }
  DualModel fit_ts(double lambda_d, double lambda_t) const {
    return models::fit_ts(ek_, eg_, y_, lambda_d, lambda_t);
  }

 private:
  KernelMatrix k_, g_;
  LabelMatrix y_;
  EigenDecomposition ek_, eg_;
};

}  // namespace pairlearn::models
