#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <vector>

#include "helpers.hpp"
#include "pairlearn/metrics.hpp"

using namespace pairlearn;
using namespace pairlearn::metrics;
using testutil::random_matrix;

namespace {

// O(n^2) pair-enumeration oracle with half credit for ties.
double auc_pairs(const std::vector<double>& scores, const std::vector<int>& labels) {
  double credit = 0.0, pairs = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i)
    for (std::size_t j = 0; j < scores.size(); ++j) {
      if (labels[i] == 1 && labels[j] == 0) {
        pairs += 1.0;
        if (scores[i] > scores[j])
          credit += 1.0;
        else if (scores[i] == scores[j])
          credit += 0.5;
      }
    }
  return credit / pairs;
}

Matrix row_matrix(const std::vector<double>& v) {
  Matrix m(1, static_cast<Index>(v.size()));
  for (Index i = 0; i < m.cols(); ++i) m(0, i) = v[static_cast<std::size_t>(i)];
  return m;
}

}  // namespace

TEST_CASE("micro_auc basics") {
  CHECK(micro_auc(row_matrix({1, 0}), row_matrix({0.9, 0.1})) == 1.0);
  CHECK(micro_auc(row_matrix({1, 0}), row_matrix({0.4, 0.4})) == 0.5);
  CHECK(micro_auc(row_matrix({1, 1, 0, 0}), row_matrix({0.8, 0.6, 0.7, 0.1})) == 0.75);
  CHECK_THROWS_MATCHES(micro_auc(row_matrix({1, 1}), row_matrix({0.5, 0.5})), Error,
                       Catch::Matchers::Predicate<Error>([](const Error& e) {
                         return e.code() == ErrorCode::DegenerateClasses;
                       }));
  CHECK_THROWS_MATCHES(micro_auc(row_matrix({2, 0}), row_matrix({0.5, 0.5})), Error,
                       Catch::Matchers::Predicate<Error>(
                           [](const Error& e) { return e.code() == ErrorCode::InvalidLabels; }));
}

TEST_CASE("micro_auc equals pair enumeration exactly, ties included") {
  auto gen = testutil::rng(91);
  std::uniform_int_distribution<int> coin(0, 1);
  std::uniform_int_distribution<int> level(0, 4);  // few levels force ties
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 5 + static_cast<std::size_t>(trial % 20);
    std::vector<double> scores(n);
    std::vector<int> labels(n);
    bool pos = false, neg = false;
    for (std::size_t i = 0; i < n; ++i) {
      scores[i] = 0.25 * level(gen);
      labels[i] = coin(gen);
      (labels[i] ? pos : neg) = true;
    }
    if (!pos || !neg) {
      labels[0] = 1;
      labels[1] = 0;
    }
    Matrix truth(1, static_cast<Index>(n)), sc(1, static_cast<Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
      truth(0, static_cast<Index>(i)) = labels[i];
      sc(0, static_cast<Index>(i)) = scores[i];
    }
    CHECK(micro_auc(truth, sc) == auc_pairs(scores, labels));
  }
}

TEST_CASE("micro_auc of the truth against itself is 1") {
  auto gen = testutil::rng(92);
  Matrix y(3, 4);
  std::bernoulli_distribution coin(0.5);
  bool pos = false, neg = false;
  for (Index i = 0; i < 3; ++i)
    for (Index j = 0; j < 4; ++j) {
      y(i, j) = coin(gen) ? 1.0 : 0.0;
      (y(i, j) == 1.0 ? pos : neg) = true;
    }
  if (!pos) y(0, 0) = 1.0;
  if (!neg) y(1, 1) = 0.0;
  CHECK(micro_auc(y, y) == 1.0);
}

TEST_CASE("macro_auc basics") {
  Matrix truth(2, 1), scores(2, 1);
  truth << 1, 0;
  scores << 0.9, 0.1;
  CHECK(macro_auc(truth, scores, Axis::cols).value == 1.0);

  Matrix all_pos = Matrix::Ones(2, 2);
  CHECK_THROWS_MATCHES(macro_auc(all_pos, all_pos, Axis::rows), Error,
                       Catch::Matchers::Predicate<Error>(
                           [](const Error& e) { return e.code() == ErrorCode::NoValidSlices; }));
}

TEST_CASE("macro_auc equals the mean of per-slice pair counts and reports skips") {
  auto gen = testutil::rng(93);
  std::bernoulli_distribution coin(0.5);
  std::uniform_int_distribution<int> level(0, 3);
  for (int trial = 0; trial < 20; ++trial) {
    Matrix truth(5, 4), scores(5, 4);
    for (Index i = 0; i < 5; ++i)
      for (Index j = 0; j < 4; ++j) {
        truth(i, j) = coin(gen) ? 1.0 : 0.0;
        scores(i, j) = 0.5 * level(gen);
      }
    double sum = 0.0;
    int valid = 0, skipped = 0;
    for (Index i = 0; i < 5; ++i) {
      std::vector<double> s;
      std::vector<int> l;
      int p = 0;
      for (Index j = 0; j < 4; ++j) {
        s.push_back(scores(i, j));
        l.push_back(static_cast<int>(truth(i, j)));
        p += l.back();
      }
      if (p == 0 || p == 4) {
        ++skipped;
        continue;
      }
      sum += auc_pairs(s, l);
      ++valid;
    }
    if (valid == 0) {
      CHECK_THROWS_AS(macro_auc(truth, scores, Axis::rows), Error);
      continue;
    }
    const auto result = macro_auc(truth, scores, Axis::rows);
    CHECK(result.value == Catch::Approx(sum / valid).margin(1e-15));
    CHECK(result.skipped_slices == skipped);
  }
}

TEST_CASE("c_index basics") {
  Vector y(3), f(3);
  y << 1, 2, 3;
  f << 1, 2, 3;
  CHECK(c_index(y, f) == 1.0);

  Vector y2(2), f2(2);
  y2 << 1, 2;
  f2 << 2, 1;
  CHECK(c_index(y2, f2) == 0.0);

  Vector same(2);
  same << 1, 1;
  CHECK_THROWS_MATCHES(c_index(same, f2), Error,
                       Catch::Matchers::Predicate<Error>([](const Error& e) {
                         return e.code() == ErrorCode::NoComparablePairs;
                       }));
}

TEST_CASE("c_index equals the double-loop oracle and micro_auc on binary labels") {
  auto gen = testutil::rng(94);
  std::uniform_int_distribution<int> level(0, 4);
  for (int trial = 0; trial < 50; ++trial) {
    const Index n = 4 + (trial % 10);
    Vector y(n), f(n);
    for (Index i = 0; i < n; ++i) {
      y[i] = level(gen);
      f[i] = 0.25 * level(gen);
    }
    if (y.maxCoeff() == y.minCoeff()) y[0] += 1.0;

    double credit = 0.0, pairs = 0.0;
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < n; ++j)
        if (y[i] > y[j]) {
          pairs += 1.0;
          credit += f[i] > f[j] ? 1.0 : (f[i] == f[j] ? 0.5 : 0.0);
        }
    CHECK(c_index(y, f) == credit / pairs);
  }

  // Binary labels: the C-index is the micro AUC.
  std::uniform_int_distribution<int> coin(0, 1);
  for (int trial = 0; trial < 20; ++trial) {
    const Index n = 6 + (trial % 8);
    Vector y(n), f(n);
    for (Index i = 0; i < n; ++i) {
      y[i] = coin(gen);
      f[i] = 0.25 * level(gen);
    }
    if (y.maxCoeff() == 0.0) y[0] = 1.0;
    if (y.minCoeff() == 1.0) y[1] = 0.0;
    Matrix truth(1, n), sc(1, n);
    truth.row(0) = y.transpose();
    sc.row(0) = f.transpose();
    CHECK(std::abs(c_index(y, f) - micro_auc(truth, sc)) <= 1e-12);
  }
}

TEST_CASE("ranking metrics are invariant under strictly increasing transforms") {
  auto gen = testutil::rng(95);
  std::bernoulli_distribution coin(0.5);
  Matrix truth(4, 5), scores = random_matrix(gen, 4, 5);
  bool pos = false, neg = false;
  for (Index i = 0; i < 4; ++i)
    for (Index j = 0; j < 5; ++j) {
      truth(i, j) = coin(gen) ? 1.0 : 0.0;
      (truth(i, j) == 1.0 ? pos : neg) = true;
    }
  if (!pos) truth(0, 0) = 1.0;
  if (!neg) truth(1, 1) = 0.0;

  const Matrix affine = 2.0 * scores.array() + 1.0;
  const Matrix cubic = scores.array().pow(3);
  CHECK(micro_auc(truth, scores) == micro_auc(truth, affine));
  CHECK(micro_auc(truth, scores) == micro_auc(truth, cubic));

  const Vector y = vec(truth), f = vec(scores);
  CHECK(c_index(y, f) == c_index(y, Vector(2.0 * f.array() + 1.0)));
  CHECK(c_index(y, f) == c_index(y, Vector(f.array().pow(3))));
}

TEST_CASE("mse") {
  auto gen = testutil::rng(96);
  const Matrix a = random_matrix(gen, 3, 3);
  CHECK(mse(a, a) == 0.0);

  Matrix zero(1, 1), two(1, 1);
  zero << 0;
  two << 2;
  CHECK(mse(zero, two) == 4.0);

  const Matrix b = random_matrix(gen, 3, 3);
  double sum = 0;
  for (Index i = 0; i < 3; ++i)
    for (Index j = 0; j < 3; ++j) sum += (a(i, j) - b(i, j)) * (a(i, j) - b(i, j));
  CHECK(mse(a, b) == Catch::Approx(sum / 9.0).epsilon(1e-14));

  CHECK_THROWS_AS(mse(a, zero), Error);
}
