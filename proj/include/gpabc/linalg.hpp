#pragma once

#include <Eigen/Dense>

namespace gpabc {

/// Cholesky factor of a symmetric positive definite matrix plus the result of
/// the jitter-escalation policy that produced it. The escalation starts at
/// 1e-10 * mean(diag) and multiplies by 10 up to 1e-4 * mean(diag); beyond
/// that the matrix is reported as numerically indefinite.
struct CholeskyResult {
  Eigen::MatrixXd L;          // lower triangular factor of A + jitter * I
  double jitter = 0.0;        // jitter actually added to the diagonal
  double log_det = 0.0;       // log det of the factored matrix

  Eigen::VectorXd solve(const Eigen::VectorXd& b) const;
  Eigen::MatrixXd solve(const Eigen::MatrixXd& B) const;
  /// Solution of L y = b (half solve).
  Eigen::VectorXd half_solve(const Eigen::VectorXd& b) const;
  /// Explicit inverse of the factored matrix.
  Eigen::MatrixXd inverse() const;
};

/// Attempts a Cholesky factorization of A as-is; on failure escalates jitter
/// per the policy above. Throws NumericalError if the ceiling is reached.
CholeskyResult cholesky_with_jitter(const Eigen::MatrixXd& A);

/// Plain factorization attempt with the given fixed jitter; throws on failure.
CholeskyResult cholesky_fixed(const Eigen::MatrixXd& A, double jitter);

}  // namespace gpabc
