#pragma once

#include <Eigen/Cholesky>

#include <string>

#include "pairlearn/common.hpp"

namespace pairlearn::online {

/// Primal-form two-step model over explicit feature vectors, with cached
/// update matrices for closed-form mini-batch learning. Updates return new
/// values; sequencing is the caller's responsibility.
///
/// Supporting task updates requires the m x r accumulator y_psi, so memory
/// grows with the number of instances seen. That is the cost of Algorithm-2
/// style updates; instance-only streams could drop phi and y_psi entirely.
struct PrimalModel {
  double lambda_d = 0.0;
  double lambda_t = 0.0;
  Index d = 0;  // instance feature dimension
  Index r = 0;  // task feature dimension

  Matrix phi;      // m x d, instance features seen so far
  Matrix psi;      // q x r, task features seen so far
  Matrix c_d;      // phi^T phi + lambda_d I
  Matrix c_r;      // psi^T psi + lambda_t I
  Matrix m_inv;    // c_d^{-1}
  Matrix n_inv;    // c_r^{-1}
  Matrix phi_t_y;  // d x q accumulator phi^T Y
  Matrix y_psi;    // m x r accumulator Y psi
  Matrix w;        // d x r weight matrix

  Index instances() const { return phi.rows(); }
  Index tasks() const { return psi.rows(); }
};

namespace detail {

inline Matrix pd_inverse(const Matrix& a, const char* what) {
  Eigen::LLT<Matrix> llt(a);
  require(llt.info() == Eigen::Success, ErrorCode::SingularSystem,
          std::string(what) + ": matrix is not positive definite");
  Matrix inv = llt.solve(Matrix::Identity(a.rows(), a.cols()));
  return 0.5 * (inv + inv.transpose());
}

inline Matrix recompute_w(const PrimalModel& m) {
  return m.m_inv * m.phi_t_y * m.psi * m.n_inv;
}

}  // namespace detail

/// Batch initialization: W = (Phi^T Phi + lambda_d I)^{-1} Phi^T Y Psi
/// (Psi^T Psi + lambda_t I)^{-1}, via the matrix inversion lemma form that
/// only ever inverts d x d and r x r matrices.
inline PrimalModel init_primal(const Matrix& phi, const Matrix& psi, const Matrix& y,
                               double lambda_d, double lambda_t) {
  require(lambda_d > 0.0 && lambda_t > 0.0, ErrorCode::InvalidArgument,
          "primal model requires strictly positive regularization");
  require(y.rows() == phi.rows() && y.cols() == psi.rows(), ErrorCode::DimensionMismatch,
          "init_primal: label shape must be (instances x tasks)");
  require_finite(phi, "instance features");
  require_finite(psi, "task features");
  require_finite(y, "labels");

  PrimalModel m;
  m.lambda_d = lambda_d;
  m.lambda_t = lambda_t;
  m.d = phi.cols();
  m.r = psi.cols();
  m.phi = phi;
  m.psi = psi;
  m.c_d = phi.transpose() * phi + lambda_d * Matrix::Identity(m.d, m.d);
  m.c_r = psi.transpose() * psi + lambda_t * Matrix::Identity(m.r, m.r);
  m.m_inv = detail::pd_inverse(m.c_d, "init_primal instance gram");
  m.n_inv = detail::pd_inverse(m.c_r, "init_primal task gram");
  m.phi_t_y = phi.transpose() * y;
  m.y_psi = y * psi;
  m.w = detail::recompute_w(m);
  return m;
}

/// Mini-batch update with l new instances. The Woodbury identity updates
/// M = (Phi^T Phi + lambda_d I)^{-1} by inverting an l x l matrix; when
/// l > d the direct d x d inverse of the refreshed gram is cheaper and is
/// selected automatically.
inline PrimalModel update_instances(const PrimalModel& model, const Matrix& phi_new,
                                    const Matrix& y_new) {
  require(phi_new.cols() == model.d, ErrorCode::DimensionMismatch,
          "update_instances: feature width must be " + std::to_string(model.d));
  require(y_new.rows() == phi_new.rows() && y_new.cols() == model.tasks(),
          ErrorCode::DimensionMismatch, "update_instances: label block shape mismatch");
  require_finite(phi_new, "new instance features");
  require_finite(y_new, "new labels");

  PrimalModel out = model;
  const Index l = phi_new.rows();
  out.c_d += phi_new.transpose() * phi_new;
  if (l <= model.d) {
    const Matrix cross = model.m_inv * phi_new.transpose();  // d x l
    const Matrix small = phi_new * cross + Matrix::Identity(l, l);
    Eigen::LLT<Matrix> llt(small);
    require(llt.info() == Eigen::Success, ErrorCode::SingularSystem,
            "update_instances: Woodbury core not positive definite");
    const Matrix updated = model.m_inv - cross * llt.solve(cross.transpose());
    out.m_inv = 0.5 * (updated + updated.transpose());
  } else {
    out.m_inv = detail::pd_inverse(out.c_d, "update_instances gram");
  }

  out.phi.conservativeResize(model.instances() + l, Eigen::NoChange);
  out.phi.bottomRows(l) = phi_new;
  out.phi_t_y += phi_new.transpose() * y_new;
  out.y_psi.conservativeResize(model.instances() + l, Eigen::NoChange);
  out.y_psi.bottomRows(l) = y_new * model.psi;
  out.w = detail::recompute_w(out);
  return out;
}

/// Mini-batch update with l new tasks (label columns), mirroring
/// update_instances on the task side.
inline PrimalModel update_tasks(const PrimalModel& model, const Matrix& psi_new,
                                const Matrix& y_new) {
  require(psi_new.cols() == model.r, ErrorCode::DimensionMismatch,
          "update_tasks: feature width must be " + std::to_string(model.r));
  require(y_new.cols() == psi_new.rows() && y_new.rows() == model.instances(),
          ErrorCode::DimensionMismatch, "update_tasks: label block shape mismatch");
  require_finite(psi_new, "new task features");
  require_finite(y_new, "new labels");

  PrimalModel out = model;
  const Index l = psi_new.rows();
  out.c_r += psi_new.transpose() * psi_new;
  if (l <= model.r) {
    const Matrix cross = model.n_inv * psi_new.transpose();  // r x l
    const Matrix small = psi_new * cross + Matrix::Identity(l, l);
    Eigen::LLT<Matrix> llt(small);
    require(llt.info() == Eigen::Success, ErrorCode::SingularSystem,
            "update_tasks: Woodbury core not positive definite");
    const Matrix updated = model.n_inv - cross * llt.solve(cross.transpose());
    out.n_inv = 0.5 * (updated + updated.transpose());
  } else {
    out.n_inv = detail::pd_inverse(out.c_r, "update_tasks gram");
  }

  out.psi.conservativeResize(model.tasks() + l, Eigen::NoChange);
  out.psi.bottomRows(l) = psi_new;
  out.phi_t_y.conservativeResize(Eigen::NoChange, model.tasks() + l);
  out.phi_t_y.rightCols(l) = model.phi.transpose() * y_new;
  out.y_psi += y_new * psi_new;
  out.w = detail::recompute_w(out);
  return out;
}

/// f(phi, psi) = phi^T W psi.
inline double predict_primal(const PrimalModel& model, const Vector& phi, const Vector& psi) {
  require(phi.size() == model.d && psi.size() == model.r, ErrorCode::DimensionMismatch,
          "predict_primal: feature dimensions do not match the model");
  return phi.dot(model.w * psi);
}

/// Batch predictions for feature matrices: Phi W Psi^T.
inline Matrix predict_primal(const PrimalModel& model, const Matrix& phi, const Matrix& psi) {
  require(phi.cols() == model.d && psi.cols() == model.r, ErrorCode::DimensionMismatch,
          "predict_primal: feature dimensions do not match the model");
  return phi * model.w * psi.transpose();
}

}  // namespace pairlearn::online
