#include "gpabc/linalg.hpp"

#include <cmath>
#include <string>

#include "gpabc/errors.hpp"

namespace gpabc {

namespace {

double log_det_from_factor(const Eigen::MatrixXd& L) {
  double acc = 0.0;
  for (Eigen::Index i = 0; i < L.rows(); ++i) acc += std::log(L(i, i));
  return 2.0 * acc;
}

bool try_factor(const Eigen::MatrixXd& A, double jitter, CholeskyResult* out) {
  Eigen::MatrixXd B = A;
  if (jitter > 0.0) B.diagonal().array() += jitter;
  Eigen::LLT<Eigen::MatrixXd> llt(B);
  if (llt.info() != Eigen::Success) return false;
  out->L = llt.matrixL();
  out->jitter = jitter;
  out->log_det = log_det_from_factor(out->L);
  return true;
}

}  // namespace

Eigen::VectorXd CholeskyResult::solve(const Eigen::VectorXd& b) const {
  Eigen::VectorXd y = L.triangularView<Eigen::Lower>().solve(b);
  return L.transpose().triangularView<Eigen::Upper>().solve(y);
}

Eigen::MatrixXd CholeskyResult::solve(const Eigen::MatrixXd& B) const {
  Eigen::MatrixXd Y = L.triangularView<Eigen::Lower>().solve(B);
  return L.transpose().triangularView<Eigen::Upper>().solve(Y);
}

Eigen::VectorXd CholeskyResult::half_solve(const Eigen::VectorXd& b) const {
  return L.triangularView<Eigen::Lower>().solve(b);
}

Eigen::MatrixXd CholeskyResult::inverse() const {
  const Eigen::Index n = L.rows();
  Eigen::MatrixXd Linv =
      L.triangularView<Eigen::Lower>().solve(Eigen::MatrixXd::Identity(n, n));
  return Linv.transpose() * Linv;
}

CholeskyResult cholesky_with_jitter(const Eigen::MatrixXd& A) {
  CholeskyResult out;
  if (try_factor(A, 0.0, &out)) return out;
  const double scale = A.diagonal().mean();
  double jitter = 1e-10 * scale;
  const double ceiling = 1e-4 * scale;
  while (jitter <= ceiling * (1.0 + 1e-12)) {
    if (try_factor(A, jitter, &out)) return out;
    jitter *= 10.0;
  }
  throw NumericalError(
      "cholesky_with_jitter: matrix indefinite after jitter escalation to " +
      std::to_string(ceiling));
}

CholeskyResult cholesky_fixed(const Eigen::MatrixXd& A, double jitter) {
  CholeskyResult out;
  if (!try_factor(A, jitter, &out)) {
    throw NumericalError("cholesky_fixed: matrix not positive definite");
  }
  return out;
}

}  // namespace gpabc
