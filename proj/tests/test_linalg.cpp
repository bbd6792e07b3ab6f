#include <catch2/catch_amalgamated.hpp>

#include "helpers.hpp"
#include "pairlearn/linalg.hpp"

using namespace pairlearn;
using namespace pairlearn::linalg;
using testutil::naive_kron;
using testutil::random_matrix;
using testutil::random_psd;
using testutil::rel_err;

TEST_CASE("sym_eig on diagonal input") {
  Matrix m(2, 2);
  m << 2, 0, 0, 1;
  const auto eig = sym_eig(m);
  CHECK(eig.values[0] == Catch::Approx(1.0));
  CHECK(eig.values[1] == Catch::Approx(2.0));
  // Eigenvectors are signed permutations of the identity columns.
  for (Index c = 0; c < 2; ++c) {
    Index nonzero = 0;
    for (Index r = 0; r < 2; ++r)
      if (std::abs(eig.vectors(r, c)) > 1e-12) ++nonzero;
    CHECK(nonzero == 1);
  }
}

TEST_CASE("sym_eig on rank-1 symmetric input") {
  Matrix m(2, 2);
  m << 1, 1, 1, 1;
  const auto eig = sym_eig(m);
  CHECK(eig.values[0] == 0.0);  // clamped exactly
  CHECK(eig.values[1] == Catch::Approx(2.0));
}

TEST_CASE("sym_eig reconstruction and orthonormality on random PSD input") {
  auto gen = testutil::rng(11);
  for (int trial = 0; trial < 5; ++trial) {
    const Index n = 8;
    const Matrix m = random_psd(gen, n);
    const auto eig = sym_eig(m);
    CHECK((eig.vectors.transpose() * eig.vectors - Matrix::Identity(n, n)).cwiseAbs().maxCoeff() <=
          1e-10 * n);
    CHECK((reconstruct(eig) - m).norm() <= 1e-9 * m.norm());
    for (Index i = 1; i < n; ++i) CHECK(eig.values[i] >= eig.values[i - 1]);
  }
}

TEST_CASE("sym_eig reconstruction up to 64x64") {
  auto gen = testutil::rng(12);
  for (Index n : {16, 33, 64}) {
    const Matrix m = random_psd(gen, n);
    const auto eig = sym_eig(m);
    CHECK((reconstruct(eig) - m).norm() <= 1e-9 * m.norm());
    CHECK(eig.values.minCoeff() >= -1e-9 * eig.values.maxCoeff());
  }
}

TEST_CASE("sym_eig rejects bad input") {
  CHECK_THROWS_MATCHES(sym_eig(Matrix::Zero(2, 3)), Error,
                       Catch::Matchers::Predicate<Error>(
                           [](const Error& e) { return e.code() == ErrorCode::NonSquare; }));
  Matrix asym(2, 2);
  asym << 1.0, 0.5, 0.1, 1.0;
  CHECK_THROWS_MATCHES(sym_eig(asym), Error, Catch::Matchers::Predicate<Error>([](const Error& e) {
                         return e.code() == ErrorCode::ExcessiveAsymmetry;
                       }));
}

TEST_CASE("sym_eig tolerates asymmetry within tolerance") {
  Matrix m(2, 2);
  m << 1.0, 0.5, 0.5 + 1e-9, 1.0;
  CHECK_NOTHROW(sym_eig(m));
}

TEST_CASE("kron_apply identity and scalar") {
  auto gen = testutil::rng(3);
  Matrix x = random_matrix(gen, 2, 2);
  CHECK(rel_err(kron_apply(Matrix::Identity(2, 2), x, Matrix::Identity(2, 2)), x) == 0.0);

  Matrix a(1, 1), b(1, 1), c(1, 1);
  a << 2;
  b << 3;
  c << 5;
  CHECK(kron_apply(a, b, c)(0, 0) == 30.0);
}

TEST_CASE("kron_apply equals the explicit Kronecker-vec oracle") {
  auto gen = testutil::rng(4);
  const Matrix m = random_matrix(gen, 3, 3);
  const Matrix x = random_matrix(gen, 3, 2);
  const Matrix n = random_matrix(gen, 2, 4);
  const Matrix direct = kron_apply(m, x, n);

  // mat((N^T (x) M) vec(X)) with column-stacking vec.
  const Matrix big = naive_kron(n.transpose(), m);
  const Vector v = big * vec(x);
  CHECK(rel_err(direct, unvec(v, m.rows(), n.cols())) < 1e-12);

  CHECK_THROWS_AS(kron_apply(m, n, x), Error);
}

TEST_CASE("kron_apply matches oracle on all shapes up to 4x4") {
  auto gen = testutil::rng(5);
  for (int trial = 0; trial < 40; ++trial) {
    std::uniform_int_distribution<Index> dim(1, 4);
    const Index a = dim(gen), b = dim(gen), c = dim(gen), d = dim(gen);
    const Matrix m = random_matrix(gen, a, b);
    const Matrix x = random_matrix(gen, b, c);
    const Matrix n = random_matrix(gen, c, d);
    const Matrix expect = unvec(Vector(naive_kron(n.transpose(), m) * vec(x)), a, d);
    CHECK(rel_err(kron_apply(m, x, n), expect) < 1e-12);
  }
}

TEST_CASE("elementwise operations") {
  Matrix a(1, 2), b(1, 2);
  a << 1, 2;
  b << 3, 4;
  Matrix prod = ew_multiply(a, b);
  CHECK(prod(0, 0) == 3.0);
  CHECK(prod(0, 1) == 8.0);

  Matrix four(1, 1), two(1, 1);
  four << 4;
  two << 2;
  CHECK(ew_divide(four, two)(0, 0) == 2.0);

  Vector v(2);
  v << 1, 2;
  const Vector r = reciprocal_shift(v, 1.0);
  CHECK(r[0] == Catch::Approx(0.5));
  CHECK(r[1] == Catch::Approx(1.0 / 3.0));

  Matrix zero = Matrix::Zero(1, 1);
  CHECK_THROWS_AS(ew_divide(four, zero), Error);
  CHECK_THROWS_AS(ew_multiply(a, four), Error);
}

TEST_CASE("vec uses column stacking with s = m*j + i") {
  Matrix y(2, 3);
  y << 1, 2, 3, 4, 5, 6;
  const Vector v = vec(y);
  for (Index i = 0; i < 2; ++i)
    for (Index j = 0; j < 3; ++j) CHECK(v[vec_index(i, j, 2)] == y(i, j));
  CHECK(rel_err(unvec(v, 2, 3), y) == 0.0);
}
