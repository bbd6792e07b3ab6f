#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "helpers.hpp"
#include "pairlearn/kernels.hpp"
#include "pairlearn/models.hpp"
#include "pairlearn/online.hpp"

using namespace pairlearn;
using namespace pairlearn::online;
using testutil::random_matrix;
using testutil::rel_err;

TEST_CASE("init_primal closed form on scalars and identities") {
  Matrix phi(1, 1), psi(1, 1), y(1, 1);
  phi << 1;
  psi << 1;
  y << 4;
  const PrimalModel m = init_primal(phi, psi, y, 1.0, 1.0);
  CHECK(m.w(0, 0) == Catch::Approx(1.0));

  const Matrix i2 = Matrix::Identity(2, 2);
  Matrix y2(2, 2);
  y2 << 4, 0, 0, 4;
  const PrimalModel m2 = init_primal(i2, i2, y2, 1.0, 1.0);
  CHECK(rel_err(m2.w, Matrix(y2 / 4.0)) < 1e-12);
}

TEST_CASE("init_primal agrees with the dual two-step fit under linear kernels") {
  auto gen = testutil::rng(81);
  const Matrix phi = random_matrix(gen, 10, 3);
  const Matrix psi = random_matrix(gen, 6, 2);
  const Matrix y = random_matrix(gen, 10, 6);
  const double ld = 0.8, lt = 1.7;

  const PrimalModel primal = init_primal(phi, psi, y, ld, lt);

  const auto k = kernels::gram_linear(phi);
  const auto g = kernels::gram_linear(psi, kernels::detail::numbered_ids("t", 6));
  const auto labels = kernels::make_label_matrix(k.ids, g.ids, y);
  const auto dual = models::fit_ts(k, g, labels, ld, lt);

  // W = Phi^T A Psi via the push-through identity.
  CHECK(rel_err(primal.w, Matrix(phi.transpose() * dual.params * psi)) <= 1e-6);

  // Predictions agree on training and random test points.
  const Matrix phi_test = random_matrix(gen, 4, 3);
  const Matrix psi_test = random_matrix(gen, 3, 2);
  const Matrix f_primal = predict_primal(primal, phi_test, psi_test);
  const Matrix f_dual = models::predict(dual, Matrix(phi_test * phi.transpose()),
                                        Matrix(psi_test * psi.transpose()));
  CHECK(rel_err(f_primal, f_dual) <= 1e-6);
}

TEST_CASE("update_instances hand-checked scalar sequence") {
  Matrix phi1(1, 1), psi(1, 1), y1(1, 1);
  phi1 << 1;
  psi << 1;
  y1 << 2;
  const PrimalModel first = init_primal(phi1, psi, y1, 1.0, 1.0);
  CHECK(first.m_inv(0, 0) == Catch::Approx(0.5));

  Matrix phi2(1, 1), y2(1, 1);
  phi2 << 1;
  y2 << 4;
  const PrimalModel second = update_instances(first, phi2, y2);
  CHECK(second.m_inv(0, 0) == Catch::Approx(1.0 / 3.0));
  CHECK(second.w(0, 0) == Catch::Approx(1.0));  // (1/3) * 6 * (1/2)

  Matrix phi_both(2, 1), y_both(2, 1);
  phi_both << 1, 1;
  y_both << 2, 4;
  const PrimalModel batch = init_primal(phi_both, psi, y_both, 1.0, 1.0);
  CHECK(rel_err(second.w, batch.w) < 1e-12);
}

TEST_CASE("zero-feature batches change nothing") {
  auto gen = testutil::rng(82);
  const Matrix phi = random_matrix(gen, 5, 3);
  const Matrix psi = random_matrix(gen, 4, 2);
  const Matrix y = random_matrix(gen, 5, 4);
  const PrimalModel base = init_primal(phi, psi, y, 0.5, 0.5);

  const PrimalModel after =
      update_instances(base, Matrix::Zero(2, 3), random_matrix(gen, 2, 4));
  CHECK(rel_err(after.w, base.w) < 1e-12);
  CHECK(rel_err(after.m_inv, base.m_inv) < 1e-12);

  const PrimalModel after_tasks =
      update_tasks(base, Matrix::Zero(2, 2), random_matrix(gen, 5, 2));
  CHECK(rel_err(after_tasks.w, base.w) < 1e-12);
}

TEST_CASE("update_tasks hand-checked scalar mirror") {
  Matrix phi(1, 1), psi1(1, 1), y1(1, 1);
  phi << 1;
  psi1 << 1;
  y1 << 2;
  const PrimalModel first = init_primal(phi, psi1, y1, 1.0, 1.0);
  Matrix psi2(1, 1), y2(1, 1);
  psi2 << 1;
  y2 << 4;
  const PrimalModel second = update_tasks(first, psi2, y2);
  CHECK(second.n_inv(0, 0) == Catch::Approx(1.0 / 3.0));
  CHECK(second.w(0, 0) == Catch::Approx(1.0));

  Matrix psi_both(2, 1), y_both(1, 2);
  psi_both << 1, 1;
  y_both << 2, 4;
  const PrimalModel batch = init_primal(phi, psi_both, y_both, 1.0, 1.0);
  CHECK(rel_err(second.w, batch.w) < 1e-12);
}

TEST_CASE("instance updates are batch consistent, including the l > d branch") {
  auto gen = testutil::rng(83);
  const Index d = 3, q = 4;
  const Matrix psi = random_matrix(gen, q, 2);
  const Matrix phi_full = random_matrix(gen, 12, d);
  const Matrix y_full = random_matrix(gen, 12, q);

  PrimalModel model = init_primal(phi_full.topRows(8), psi, y_full.topRows(8), 0.7, 1.1);
  model = update_instances(model, phi_full.middleRows(8, 2), y_full.middleRows(8, 2));
  model = update_instances(model, phi_full.middleRows(10, 2), y_full.middleRows(10, 2));
  const PrimalModel batch = init_primal(phi_full, psi, y_full, 0.7, 1.1);
  CHECK(rel_err(model.w, batch.w) <= 1e-6);

  // A batch larger than the feature dimension takes the direct-inverse route.
  PrimalModel wide = init_primal(phi_full.topRows(4), psi, y_full.topRows(4), 0.7, 1.1);
  wide = update_instances(wide, phi_full.bottomRows(8), y_full.bottomRows(8));
  CHECK(rel_err(wide.w, batch.w) <= 1e-6);
}

TEST_CASE("interleaved instance and task updates stay batch consistent") {
  auto gen = testutil::rng(84);
  std::uniform_int_distribution<int> batch_count(1, 5);
  for (int trial = 0; trial < 6; ++trial) {
    const Index d = 1 + static_cast<Index>(trial % 4), r = 2 + (trial % 3);
    const Index m0 = 6, q0 = 4;
    Matrix phi = random_matrix(gen, m0, d);
    Matrix psi = random_matrix(gen, q0, r);
    Matrix y = random_matrix(gen, m0, q0);
    PrimalModel model = init_primal(phi, psi, y, 0.9, 0.6);

    const int updates = batch_count(gen);
    for (int u = 0; u < updates; ++u) {
      if (u % 2 == 0 && phi.rows() < 50) {
        const Index l = 1 + (u % 3);
        const Matrix phi_new = random_matrix(gen, l, d);
        const Matrix y_new = random_matrix(gen, l, psi.rows());
        model = update_instances(model, phi_new, y_new);
        phi.conservativeResize(phi.rows() + l, Eigen::NoChange);
        phi.bottomRows(l) = phi_new;
        y.conservativeResize(y.rows() + l, Eigen::NoChange);
        y.bottomRows(l) = y_new;
      } else if (psi.rows() < 30) {
        const Index l = 1 + (u % 2);
        const Matrix psi_new = random_matrix(gen, l, r);
        const Matrix y_new = random_matrix(gen, phi.rows(), l);
        model = update_tasks(model, psi_new, y_new);
        psi.conservativeResize(psi.rows() + l, Eigen::NoChange);
        psi.bottomRows(l) = psi_new;
        y.conservativeResize(Eigen::NoChange, y.cols() + l);
        y.rightCols(l) = y_new;
      }
    }

    const PrimalModel batch = init_primal(phi, psi, y, 0.9, 0.6);
    CHECK(rel_err(model.w, batch.w) <= 1e-6);

    // The cached inverses stay symmetric positive definite.
    Eigen::SelfAdjointEigenSolver<Matrix> es_m(model.m_inv);
    Eigen::SelfAdjointEigenSolver<Matrix> es_n(model.n_inv);
    CHECK(es_m.eigenvalues().minCoeff() > 0.0);
    CHECK(es_n.eigenvalues().minCoeff() > 0.0);
  }
}

TEST_CASE("predict_primal basics and dimension checks") {
  Matrix w(1, 1);
  w << 1;
  PrimalModel m;
  m.d = 1;
  m.r = 1;
  m.w = w;
  Vector phi(1), psi(1);
  phi << 2;
  psi << 3;
  CHECK(predict_primal(m, phi, psi) == Catch::Approx(6.0));
  CHECK(predict_primal(m, Vector(Vector::Zero(1)), psi) == 0.0);
  Vector bad(2);
  bad << 1, 2;
  CHECK_THROWS_AS(predict_primal(m, bad, psi), Error);
}

TEST_CASE("init_primal validation") {
  auto gen = testutil::rng(85);
  const Matrix phi = random_matrix(gen, 3, 2);
  const Matrix psi = random_matrix(gen, 2, 2);
  const Matrix y = random_matrix(gen, 3, 2);
  CHECK_THROWS_AS(init_primal(phi, psi, y, 0.0, 1.0), Error);
  CHECK_THROWS_AS(init_primal(phi, psi, random_matrix(gen, 2, 2), 1.0, 1.0), Error);
}
