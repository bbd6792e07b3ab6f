#pragma once

#include <Eigen/Cholesky>

#include <string>
#include <vector>

#include "pairlearn/common.hpp"
#include "pairlearn/filters.hpp"
#include "pairlearn/kernels.hpp"
#include "pairlearn/models.hpp"

namespace pairlearn::holdout {

using filters::FilterSpec;
using kernels::KernelMatrix;
using kernels::LabelMatrix;
using linalg::EigenDecomposition;
using models::Variant;

/// The four prediction regimes: both entities seen (A), new instance (B),
/// new task (C), both new (D).
enum class Setting { A, B, C, D };

inline const char* setting_name(Setting s) {
  switch (s) {
    case Setting::A: return "A";
    case Setting::B: return "B";
    case Setting::C: return "C";
    case Setting::D: return "D";
  }
  return "?";
}

/// Held-out re-estimates for every dyad, same shape as Y.
struct LooResult {
  Setting setting = Setting::A;
  Matrix predictions;
  Variant variant = Variant::TS;
  double lambda_d = 0.0;
  double lambda_t = 0.0;
  double lambda = 0.0;
};

inline constexpr double kDenominatorFloor = 1e-12;
inline constexpr Index kDefaultOracleCap = 400;

namespace detail {

using Ids = std::vector<std::string>;

inline std::string unit_name(const Ids* ids, Index i, const char* fallback) {
  if (ids && i < static_cast<Index>(ids->size())) return "'" + (*ids)[static_cast<std::size_t>(i)] + "'";
  return std::string(fallback) + " " + std::to_string(i);
}

/// 1 - diag(H), failing loudly when a denominator collapses: that signals
/// lambda too small or duplicated entities, which the user must resolve.
inline Vector one_minus_diag(const Matrix& hat, const Ids* ids, const char* unit) {
  Vector denom(hat.rows());
  for (Index i = 0; i < hat.rows(); ++i) {
    denom[i] = 1.0 - hat(i, i);
    require(denom[i] > kDenominatorFloor, ErrorCode::DenominatorUnderflow,
            "1 - H_ii below 1e-12 for " + std::string(unit) + " " + unit_name(ids, i, unit));
  }
  return denom;
}

inline void check_result_finite(const Matrix& predictions) {
  require(predictions.allFinite(), ErrorCode::NonFinite,
          "leave-one-out predictions contain non-finite entries");
}

}  // namespace detail

/// Classical leave-one-out shortcut for (independent-task) KRR: row i equals
/// retraining without instance i and predicting all its tasks at once.
/// Serves Settings A and B for the IT model.
inline LooResult loo_it(const Matrix& h_k, const Matrix& y,
                        const detail::Ids* instance_ids = nullptr) {
  require(h_k.rows() == h_k.cols() && h_k.rows() == y.rows(), ErrorCode::DimensionMismatch,
          "loo_it: hat matrix and labels do not align");
  const Vector diag = h_k.diagonal();
  const Vector denom = detail::one_minus_diag(h_k, instance_ids, "instance");
  Matrix f = h_k * y - diag.asDiagonal() * y;
  f.array().colwise() /= denom.array();
  detail::check_result_finite(f);
  LooResult out;
  out.setting = Setting::B;
  out.variant = Variant::IT;
  out.predictions = std::move(f);
  return out;
}

/// Setting A (leave one dyad out) for Kronecker or two-step KRR. The filter
/// selects the model: kronecker_tikhonov(lambda) or two_step(lambda_d,
/// lambda_t). Works entirely through the m x q hat action and hat diagonal.
inline LooResult loo_setting_a(const FilterSpec& spec, const EigenDecomposition& ek,
                               const EigenDecomposition& eg, const Matrix& y,
                               const detail::Ids* instance_ids = nullptr,
                               const detail::Ids* task_ids = nullptr) {
  require(spec.kind != FilterSpec::Kind::tikhonov, ErrorCode::UnsupportedCombination,
          "setting A needs a pairwise filter (kronecker_tikhonov or two_step)");
  const Matrix hv = filters::pairwise_hat_action(ek, eg, spec, y);
  const Matrix d = filters::pairwise_hat_diag(ek, eg, spec);
  Matrix f(y.rows(), y.cols());
  for (Index i = 0; i < y.rows(); ++i)
    for (Index j = 0; j < y.cols(); ++j) {
      const double denom = 1.0 - d(i, j);
      require(denom > kDenominatorFloor, ErrorCode::DenominatorUnderflow,
              "1 - H_ss below 1e-12 for dyad (" +
                  detail::unit_name(instance_ids, i, "instance") + ", " +
                  detail::unit_name(task_ids, j, "task") + ")");
      f(i, j) = (hv(i, j) - d(i, j) * y(i, j)) / denom;
    }
  detail::check_result_finite(f);
  LooResult out;
  out.setting = Setting::A;
  out.variant =
      spec.kind == FilterSpec::Kind::kronecker_tikhonov ? Variant::KK : Variant::TS;
  out.lambda = spec.lambda;
  out.lambda_d = spec.lambda_d;
  out.lambda_t = spec.lambda_t;
  out.predictions = std::move(f);
  return out;
}

/// Setting B (leave one instance out) for two-step KRR:
/// row i of (H^k Y H^g - diag_m(H^k) Y H^g) / (1 - H^k_ii).
inline LooResult loo_setting_b(const Matrix& h_k, const Matrix& h_g, const Matrix& y,
                               const detail::Ids* instance_ids = nullptr) {
  require(h_k.rows() == y.rows() && h_g.rows() == y.cols(), ErrorCode::DimensionMismatch,
          "loo_setting_b: shapes do not align");
  const Vector dk = h_k.diagonal();
  const Vector denom = detail::one_minus_diag(h_k, instance_ids, "instance");
  Matrix f = (h_k * y - dk.asDiagonal() * y) * h_g;
  f.array().colwise() /= denom.array();
  detail::check_result_finite(f);
  LooResult out;
  out.setting = Setting::B;
  out.variant = Variant::TS;
  out.predictions = std::move(f);
  return out;
}

/// Setting C (leave one task out), the transpose dual of Setting B:
/// column j of (H^k Y H^g - H^k Y diag_m(H^g)) / (1 - H^g_jj).
inline LooResult loo_setting_c(const Matrix& h_k, const Matrix& h_g, const Matrix& y,
                               const detail::Ids* task_ids = nullptr) {
  require(h_k.rows() == y.rows() && h_g.rows() == y.cols(), ErrorCode::DimensionMismatch,
          "loo_setting_c: shapes do not align");
  const Vector dg = h_g.diagonal();
  const Vector denom = detail::one_minus_diag(h_g, task_ids, "task");
  const Matrix ky = h_k * y;
  Matrix f = ky * h_g - ky * dg.asDiagonal();
  f.array().rowwise() /= denom.transpose().array();
  detail::check_result_finite(f);
  LooResult out;
  out.setting = Setting::C;
  out.variant = Variant::TS;
  out.predictions = std::move(f);
  return out;
}

/// Setting D (leave out one dyad with its whole row and column):
/// ((H^k - diag_m(H^k)) Y (H^g - diag_m(H^g))) / ((1-H^k_ii)(1-H^g_jj)).
inline LooResult loo_setting_d(const Matrix& h_k, const Matrix& h_g, const Matrix& y,
                               const detail::Ids* instance_ids = nullptr,
                               const detail::Ids* task_ids = nullptr) {
  require(h_k.rows() == y.rows() && h_g.rows() == y.cols(), ErrorCode::DimensionMismatch,
          "loo_setting_d: shapes do not align");
  const Vector denom_k = detail::one_minus_diag(h_k, instance_ids, "instance");
  const Vector denom_g = detail::one_minus_diag(h_g, task_ids, "task");
  const Matrix nk = h_k - Matrix(h_k.diagonal().asDiagonal());
  const Matrix ng = h_g - Matrix(h_g.diagonal().asDiagonal());
  Matrix f = nk * y * ng;
  f.array() /= (denom_k * denom_g.transpose()).array();
  detail::check_result_finite(f);
  LooResult out;
  out.setting = Setting::D;
  out.variant = Variant::TS;
  out.predictions = std::move(f);
  return out;
}

// ---------------------------------------------------------------------------
// Brute-force retraining oracle
// ---------------------------------------------------------------------------

namespace detail {

inline Matrix drop_row(const Matrix& m, Index r) {
  Matrix out(m.rows() - 1, m.cols());
  out.topRows(r) = m.topRows(r);
  out.bottomRows(m.rows() - 1 - r) = m.bottomRows(m.rows() - 1 - r);
  return out;
}

inline Matrix drop_col(const Matrix& m, Index c) {
  Matrix out(m.rows(), m.cols() - 1);
  out.leftCols(c) = m.leftCols(c);
  out.rightCols(m.cols() - 1 - c) = m.rightCols(m.cols() - 1 - c);
  return out;
}

inline Ids drop_id(const Ids& ids, Index i) {
  Ids out = ids;
  out.erase(out.begin() + i);
  return out;
}

inline KernelMatrix drop_entity(const KernelMatrix& k, Index i) {
  return kernels::make_kernel_matrix(drop_id(k.ids, i), drop_col(drop_row(k.gram, i), i));
}

/// Row of kernel evaluations between held-out entity i and the remaining ones.
inline Matrix test_row(const Matrix& gram, Index i) {
  Matrix row(1, gram.cols() - 1);
  Index c = 0;
  for (Index j = 0; j < gram.cols(); ++j)
    if (j != i) row(0, c++) = gram(i, j);
  return row;
}

/// KRR leave-one-dyad-out by literal retraining on an explicit pairwise Gram
/// matrix: for each held-out index s, solve (P_{-s,-s} + lambda I) a = y_{-s}
/// and predict P_{s,-s} a.
inline Matrix pairwise_retrain_loo(const Matrix& pairwise_gram, const Matrix& y, double lambda) {
  const Index n = pairwise_gram.rows();
  require(n > 1, ErrorCode::NoTrainingData, "leave-one-dyad-out needs at least two dyads");
  const Vector labels = vec(y);
  Vector held_out(n);
  for (Index s = 0; s < n; ++s) {
    Matrix reduced(n - 1, n - 1);
    Vector rhs(n - 1);
    Matrix cross(1, n - 1);
    Index a = 0;
    for (Index p = 0; p < n; ++p) {
      if (p == s) continue;
      Index b = 0;
      for (Index r = 0; r < n; ++r) {
        if (r == s) continue;
        reduced(a, b++) = pairwise_gram(p, r);
      }
      rhs[a] = labels[p];
      cross(0, a) = pairwise_gram(s, p);
      ++a;
    }
    reduced += lambda * Matrix::Identity(n - 1, n - 1);
    Eigen::LDLT<Matrix> solver(reduced);
    require(solver.info() == Eigen::Success, ErrorCode::SingularSystem,
            "oracle system factorization failed");
    held_out[s] = (cross * solver.solve(rhs))(0, 0);
  }
  return unvec(held_out, y.rows(), y.cols());
}

inline models::DualModel refit(Variant variant, const KernelMatrix& k, const KernelMatrix& g,
                               const LabelMatrix& y, double lambda_d, double lambda_t,
                               double lambda) {
  switch (variant) {
    case Variant::IT: return models::fit_it(k, y, lambda_d);
    case Variant::KK: return models::fit_kk(k, g, y, lambda);
    case Variant::TS: return models::fit_ts(k, g, y, lambda_d, lambda_t);
    default:
      fail(ErrorCode::UnsupportedCombination, "oracle supports variants it, kk and ts");
  }
}

inline LabelMatrix reduced_labels(const LabelMatrix& y, Index drop_i, Index drop_j) {
  Matrix values = y.values;
  Ids instance_ids = y.instance_ids;
  Ids task_ids = y.task_ids;
  if (drop_i >= 0) {
    values = drop_row(values, drop_i);
    instance_ids = drop_id(instance_ids, drop_i);
  }
  if (drop_j >= 0) {
    values = drop_col(values, drop_j);
    task_ids = drop_id(task_ids, drop_j);
  }
  return kernels::make_label_matrix(std::move(instance_ids), std::move(task_ids),
                                    std::move(values));
}

}  // namespace detail

/// Retraining oracle for every setting: refits the designated model from
/// scratch for each held-out unit and predicts the held-out labels. Gated by
/// a dyad cap because it is quadratic-to-cubic in everything.
inline LooResult brute_force_loo(Variant variant, Setting setting, const KernelMatrix& k,
                                 const KernelMatrix& g, const LabelMatrix& y, double lambda_d,
                                 double lambda_t, double lambda,
                                 Index cap = kDefaultOracleCap) {
  models::detail::check_alignment(k.ids, y.instance_ids, "instance");
  models::detail::check_alignment(g.ids, y.task_ids, "task");
  const Index m = y.instances(), q = y.tasks();
  require(m * q <= cap, ErrorCode::SizeOverflow,
          "brute_force_loo: " + std::to_string(m * q) + " dyads exceed the cap of " +
              std::to_string(cap));

  LooResult out;
  out.setting = setting;
  out.variant = variant;
  out.lambda_d = lambda_d;
  out.lambda_t = lambda_t;
  out.lambda = lambda;
  Matrix f(m, q);

  require(variant == Variant::IT || variant == Variant::KK || variant == Variant::TS,
          ErrorCode::UnsupportedCombination, "LOO is defined for models it, kk and ts");
  require(variant != Variant::IT || setting == Setting::A || setting == Setting::B,
          ErrorCode::UnsupportedCombination,
          "independent-task LOO exists only for settings A and B");

  switch (setting) {
    case Setting::A: {
      if (variant == Variant::IT) {
        // IT treats Setting A exactly like Setting B: whole rows are held out.
        break;
      }
      Matrix pairwise;
      double ridge = lambda;
      if (variant == Variant::KK) {
        pairwise = kernels::kron_gram(g, k, cap);
      } else {
        // Two-step Setting A is leave-one-dyad-out in the value-regularization
        // sense: KRR with the Xi kernel and ridge parameter 1.
        pairwise = kernels::xi_gram(k, g, lambda_d, lambda_t, cap);
        ridge = 1.0;
      }
      f = detail::pairwise_retrain_loo(pairwise, y.values, ridge);
      out.predictions = std::move(f);
      return out;
    }
    case Setting::B:
      break;
    case Setting::C: {
      require(q > 1, ErrorCode::NoTrainingData, "setting C needs at least two tasks");
      for (Index j = 0; j < q; ++j) {
        const KernelMatrix g_red = detail::drop_entity(g, j);
        const LabelMatrix y_red = detail::reduced_labels(y, -1, j);
        const models::DualModel model =
            detail::refit(variant, k, g_red, y_red, lambda_d, lambda_t, lambda);
        f.col(j) = models::predict(model, k.gram, detail::test_row(g.gram, j)).col(0);
      }
      out.predictions = std::move(f);
      return out;
    }
    case Setting::D: {
      require(m > 1 && q > 1, ErrorCode::NoTrainingData,
              "setting D needs at least two instances and two tasks");
      for (Index i = 0; i < m; ++i) {
        const KernelMatrix k_red = detail::drop_entity(k, i);
        const Matrix k_row = detail::test_row(k.gram, i);
        for (Index j = 0; j < q; ++j) {
          const KernelMatrix g_red = detail::drop_entity(g, j);
          const LabelMatrix y_red = detail::reduced_labels(y, i, j);
          const models::DualModel model =
              detail::refit(variant, k_red, g_red, y_red, lambda_d, lambda_t, lambda);
          f(i, j) = models::predict(model, k_row, detail::test_row(g.gram, j))(0, 0);
        }
      }
      out.predictions = std::move(f);
      return out;
    }
  }

  // Row-wise retraining: Setting B for every variant, and IT's Setting A.
  require(m > 1, ErrorCode::NoTrainingData, "leave-one-instance-out needs at least two instances");
  for (Index i = 0; i < m; ++i) {
    const KernelMatrix k_red = detail::drop_entity(k, i);
    const LabelMatrix y_red = detail::reduced_labels(y, i, -1);
    const models::DualModel model =
        detail::refit(variant, k_red, g, y_red, lambda_d, lambda_t, lambda);
    Matrix g_test;
    if (variant == Variant::IT) {
      std::vector<Index> all(static_cast<std::size_t>(q));
      for (Index j = 0; j < q; ++j) all[static_cast<std::size_t>(j)] = j;
      g_test = models::selector_rows(all, q);
    } else {
      g_test = g.gram;
    }
    f.row(i) = models::predict(model, detail::test_row(k.gram, i), g_test).row(0);
  }
  out.predictions = std::move(f);
  return out;
}

}  // namespace pairlearn::holdout
