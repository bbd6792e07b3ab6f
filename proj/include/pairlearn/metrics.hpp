#pragma once

#include <algorithm>
#include <numeric>
#include <string>
#include <vector>

#include "pairlearn/common.hpp"

namespace pairlearn::metrics {

enum class Axis { rows, cols };

namespace detail {

inline void check_binary(double v) {
  require(v == 0.0 || v == 1.0, ErrorCode::InvalidLabels,
          "AUC needs binary {0,1} truth values, found " + std::to_string(v));
}

/// Rank-based AUC with half credit for tied scores. O(n log n); exact with
/// respect to pair enumeration because ranks are dyadic rationals.
inline double auc_ranked(const std::vector<double>& scores, const std::vector<char>& positive) {
  const std::size_t n = scores.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  double positive_rank_sum = 0.0;
  std::size_t n_pos = 0;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j < n && scores[order[j]] == scores[order[i]]) ++j;
    const double avg_rank = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j));
    for (std::size_t k = i; k < j; ++k)
      if (positive[order[k]]) {
        positive_rank_sum += avg_rank;
        ++n_pos;
      }
    i = j;
  }
  const std::size_t n_neg = n - n_pos;
  require(n_pos > 0 && n_neg > 0, ErrorCode::DegenerateClasses,
          "AUC needs at least one positive and one negative");
  const double np = static_cast<double>(n_pos);
  return (positive_rank_sum - np * (np + 1.0) / 2.0) / (np * static_cast<double>(n_neg));
}

}  // namespace detail

/// AUC over all dyads jointly: the fraction of (positive, negative) pairs
/// ranked correctly, ties counted 0.5.
inline double micro_auc(const Matrix& truth, const Matrix& scores) {
  require(truth.rows() == scores.rows() && truth.cols() == scores.cols(),
          ErrorCode::DimensionMismatch, "micro_auc: shape mismatch");
  std::vector<double> s;
  std::vector<char> pos;
  s.reserve(static_cast<std::size_t>(truth.size()));
  pos.reserve(static_cast<std::size_t>(truth.size()));
  for (Index i = 0; i < truth.rows(); ++i)
    for (Index j = 0; j < truth.cols(); ++j) {
      detail::check_binary(truth(i, j));
      s.push_back(scores(i, j));
      pos.push_back(truth(i, j) == 1.0);
    }
  return detail::auc_ranked(s, pos);
}

struct MacroAucResult {
  double value = 0.0;
  int skipped_slices = 0;  // slices lacking both classes
};

/// Unweighted mean of per-row (or per-column) AUCs. Slices with only one
/// class present are skipped and counted.
inline MacroAucResult macro_auc(const Matrix& truth, const Matrix& scores, Axis axis) {
  require(truth.rows() == scores.rows() && truth.cols() == scores.cols(),
          ErrorCode::DimensionMismatch, "macro_auc: shape mismatch");
  const Index slices = axis == Axis::rows ? truth.rows() : truth.cols();
  const Index len = axis == Axis::rows ? truth.cols() : truth.rows();
  MacroAucResult out;
  double sum = 0.0;
  int valid = 0;
  for (Index s = 0; s < slices; ++s) {
    std::vector<double> sc(static_cast<std::size_t>(len));
    std::vector<char> pos(static_cast<std::size_t>(len));
    Index n_pos = 0;
    for (Index k = 0; k < len; ++k) {
      const double t = axis == Axis::rows ? truth(s, k) : truth(k, s);
      detail::check_binary(t);
      sc[static_cast<std::size_t>(k)] = axis == Axis::rows ? scores(s, k) : scores(k, s);
      pos[static_cast<std::size_t>(k)] = t == 1.0;
      n_pos += t == 1.0;
    }
    if (n_pos == 0 || n_pos == len) {
      ++out.skipped_slices;
      continue;
    }
    sum += detail::auc_ranked(sc, pos);
    ++valid;
  }
  require(valid > 0, ErrorCode::NoValidSlices,
          "macro AUC: no slice contains both classes");
  out.value = sum / valid;
  return out;
}

/// Concordance index: among pairs with y_i > y_j, the fraction with
/// f_i > f_j, half credit for f_i == f_j. Ties in y are excluded.
inline double c_index(const Vector& y, const Vector& f) {
  require(y.size() == f.size(), ErrorCode::DimensionMismatch, "c_index: size mismatch");
  double comparable = 0.0, credit = 0.0;
  for (Index i = 0; i < y.size(); ++i)
    for (Index j = 0; j < y.size(); ++j) {
      if (y[i] > y[j]) {
        comparable += 1.0;
        if (f[i] > f[j])
          credit += 1.0;
        else if (f[i] == f[j])
          credit += 0.5;
      }
    }
  require(comparable > 0.0, ErrorCode::NoComparablePairs,
          "c_index: no pair with strictly different true labels");
  return credit / comparable;
}

inline double mse(const Matrix& truth, const Matrix& pred) {
  require(truth.rows() == pred.rows() && truth.cols() == pred.cols(),
          ErrorCode::DimensionMismatch, "mse: shape mismatch");
  require(truth.size() > 0, ErrorCode::DimensionMismatch, "mse: empty matrices");
  return (truth - pred).squaredNorm() / static_cast<double>(truth.size());
}

}  // namespace pairlearn::metrics
