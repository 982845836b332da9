#pragma once

#include <Eigen/Dense>
#include <functional>

namespace gpabc {

/// Objective for gradient-based minimization; writes the gradient when the
/// pointer is non-null. Implementations may throw NumericalError; the
/// optimizers treat that as an infeasible point.
using GradObjective = std::function<double(const Eigen::VectorXd&, Eigen::VectorXd*)>;
using Objective = std::function<double(const Eigen::VectorXd&)>;

struct OptimResult {
  Eigen::VectorXd x;
  double value = 0.0;
  double grad_norm = 0.0;   // L2 norm at x (BFGS only)
  int iterations = 0;
  bool converged = false;   // gradient/size tolerance reached
  bool failed = false;      // no finite evaluation at all
};

struct BfgsOptions {
  int max_iterations = 200;
  double grad_tolerance = 1e-6;
  double initial_step = 0.1;
  double line_search_tol = 0.1;
};

struct NelderMeadOptions {
  int max_iterations = 400;
  double size_tolerance = 1e-3;
};

/// BFGS (GSL vector_bfgs2) with automatic restarts when the line search
/// stalls, followed by a short steepest-descent polish if the gradient
/// tolerance has not been met. Deterministic.
OptimResult minimize_bfgs(const GradObjective& f, const Eigen::VectorXd& x0,
                          const BfgsOptions& opts = {});

/// Nelder-Mead (GSL nmsimplex2). Deterministic.
OptimResult minimize_nelder_mead(const Objective& f, const Eigen::VectorXd& x0,
                                 const Eigen::VectorXd& step,
                                 const NelderMeadOptions& opts = {});

}  // namespace gpabc
