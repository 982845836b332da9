#include "gpabc/optim.hpp"

#include <gsl/gsl_errno.h>
#include <gsl/gsl_multimin.h>

#include <cmath>
#include <limits>

#include "gpabc/errors.hpp"

namespace gpabc {

namespace {

constexpr double kInfeasible = 1e25;

struct GradProblem {
  const GradObjective* f;
  int n;
  // One-slot cache so that GSL's separate f/df callbacks do not recompute.
  Eigen::VectorXd cached_x;
  double cached_value = 0.0;
  Eigen::VectorXd cached_grad;
  bool cache_valid = false;

  void eval(const gsl_vector* v, double* value, Eigen::VectorXd* grad) {
    Eigen::VectorXd x(n);
    for (int i = 0; i < n; ++i) x(i) = gsl_vector_get(v, i);
    if (cache_valid && x == cached_x) {
      *value = cached_value;
      if (grad) *grad = cached_grad;
      return;
    }
    Eigen::VectorXd g(n);
    double val;
    try {
      val = (*f)(x, &g);
    } catch (const Error&) {
      val = kInfeasible;
      g.setZero();
    }
    if (!std::isfinite(val)) {
      val = kInfeasible;
      g.setZero();
    }
    for (int i = 0; i < n; ++i) {
      if (!std::isfinite(g(i))) {
        val = kInfeasible;
        g.setZero();
        break;
      }
    }
    cached_x = x;
    cached_value = val;
    cached_grad = g;
    cache_valid = true;
    *value = val;
    if (grad) *grad = g;
  }
};

double gp_f(const gsl_vector* v, void* params) {
  auto* prob = static_cast<GradProblem*>(params);
  double value;
  prob->eval(v, &value, nullptr);
  return value;
}

void gp_df(const gsl_vector* v, void* params, gsl_vector* g) {
  auto* prob = static_cast<GradProblem*>(params);
  double value;
  Eigen::VectorXd grad;
  prob->eval(v, &value, &grad);
  for (int i = 0; i < prob->n; ++i) gsl_vector_set(g, i, grad(i));
}

void gp_fdf(const gsl_vector* v, void* params, double* value, gsl_vector* g) {
  auto* prob = static_cast<GradProblem*>(params);
  Eigen::VectorXd grad;
  prob->eval(v, value, &grad);
  for (int i = 0; i < prob->n; ++i) gsl_vector_set(g, i, grad(i));
}

void ensure_gsl_handler_off() {
  static const auto once = [] {
    gsl_set_error_handler_off();
    return 0;
  }();
  (void)once;
}

// Backtracking steepest-descent polish. GSL's line search occasionally
// reports ENOPROG short of the gradient tolerance; a few descent steps
// recover the stationary point.
void polish_descent(const GradObjective& f, Eigen::VectorXd& x, double& value,
                    Eigen::VectorXd& grad, double grad_tol, int budget) {
  for (int it = 0; it < budget; ++it) {
    if (grad.norm() < grad_tol) return;
    double step = 1.0;
    bool moved = false;
    const double g2 = grad.squaredNorm();
    for (int k = 0; k < 40; ++k) {
      Eigen::VectorXd xn = x - step * grad;
      Eigen::VectorXd gn(x.size());
      double vn;
      try {
        vn = f(xn, &gn);
      } catch (const Error&) {
        step *= 0.5;
        continue;
      }
      if (std::isfinite(vn) && vn <= value - 1e-4 * step * g2) {
        x = xn;
        value = vn;
        grad = gn;
        moved = true;
        break;
      }
      step *= 0.5;
    }
    if (!moved) return;
  }
}

}  // namespace

OptimResult minimize_bfgs(const GradObjective& f, const Eigen::VectorXd& x0,
                          const BfgsOptions& opts) {
  ensure_gsl_handler_off();
  const int n = static_cast<int>(x0.size());
  GradProblem prob{&f, n, {}, 0.0, {}, false};

  gsl_multimin_function_fdf fdf;
  fdf.n = static_cast<std::size_t>(n);
  fdf.f = &gp_f;
  fdf.df = &gp_df;
  fdf.fdf = &gp_fdf;
  fdf.params = &prob;

  gsl_vector* x = gsl_vector_alloc(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) gsl_vector_set(x, i, x0(i));

  gsl_multimin_fdfminimizer* s = gsl_multimin_fdfminimizer_alloc(
      gsl_multimin_fdfminimizer_vector_bfgs2, static_cast<std::size_t>(n));
  gsl_multimin_fdfminimizer_set(s, &fdf, x, opts.initial_step, opts.line_search_tol);

  OptimResult result;
  int iter = 0;
  int stalls = 0;
  while (iter < opts.max_iterations) {
    ++iter;
    const int status = gsl_multimin_fdfminimizer_iterate(s);
    if (status == GSL_ENOPROG || status != GSL_SUCCESS) {
      if (stalls < 2 &&
          gsl_multimin_test_gradient(s->gradient, opts.grad_tolerance) != GSL_SUCCESS) {
        ++stalls;
        gsl_multimin_fdfminimizer_restart(s);
        continue;
      }
      break;
    }
    if (gsl_multimin_test_gradient(s->gradient, opts.grad_tolerance) == GSL_SUCCESS) {
      break;
    }
  }

  Eigen::VectorXd xb(n), gb(n);
  for (int i = 0; i < n; ++i) {
    xb(i) = gsl_vector_get(s->x, i);
    gb(i) = gsl_vector_get(s->gradient, i);
  }
  double vb = s->f;
  gsl_multimin_fdfminimizer_free(s);
  gsl_vector_free(x);

  if (!std::isfinite(vb) || vb >= kInfeasible) {
    // Fall back to the starting point if it at least evaluates.
    try {
      Eigen::VectorXd g0(n);
      const double v0 = f(x0, &g0);
      if (std::isfinite(v0) && v0 < kInfeasible) {
        xb = x0;
        vb = v0;
        gb = g0;
      } else {
        result.failed = true;
      }
    } catch (const Error&) {
      result.failed = true;
    }
  }

  if (!result.failed && gb.norm() >= opts.grad_tolerance) {
    polish_descent(f, xb, vb, gb, opts.grad_tolerance, 100);
  }

  result.x = xb;
  result.value = vb;
  result.grad_norm = result.failed ? std::numeric_limits<double>::infinity() : gb.norm();
  result.iterations = iter;
  result.converged = !result.failed && result.grad_norm < opts.grad_tolerance;
  return result;
}

OptimResult minimize_nelder_mead(const Objective& f, const Eigen::VectorXd& x0,
                                 const Eigen::VectorXd& step,
                                 const NelderMeadOptions& opts) {
  ensure_gsl_handler_off();
  const int n = static_cast<int>(x0.size());

  struct Wrap {
    const Objective* f;
    int n;
  } wrap{&f, n};

  gsl_multimin_function func;
  func.n = static_cast<std::size_t>(n);
  func.params = &wrap;
  func.f = [](const gsl_vector* v, void* params) -> double {
    auto* w = static_cast<Wrap*>(params);
    Eigen::VectorXd x(w->n);
    for (int i = 0; i < w->n; ++i) x(i) = gsl_vector_get(v, i);
    try {
      const double val = (*w->f)(x);
      return std::isfinite(val) ? val : kInfeasible;
    } catch (const Error&) {
      return kInfeasible;
    }
  };

  gsl_vector* x = gsl_vector_alloc(static_cast<std::size_t>(n));
  gsl_vector* st = gsl_vector_alloc(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    gsl_vector_set(x, i, x0(i));
    gsl_vector_set(st, i, step(i));
  }

  gsl_multimin_fminimizer* s = gsl_multimin_fminimizer_alloc(
      gsl_multimin_fminimizer_nmsimplex2, static_cast<std::size_t>(n));
  gsl_multimin_fminimizer_set(s, &func, x, st);

  OptimResult result;
  int iter = 0;
  while (iter < opts.max_iterations) {
    ++iter;
    if (gsl_multimin_fminimizer_iterate(s) != GSL_SUCCESS) break;
    if (gsl_multimin_fminimizer_size(s) < opts.size_tolerance) {
      result.converged = true;
      break;
    }
  }

  result.x.resize(n);
  for (int i = 0; i < n; ++i) result.x(i) = gsl_vector_get(s->x, i);
  result.value = s->fval;
  result.iterations = iter;
  result.failed = !(std::isfinite(result.value) && result.value < kInfeasible);
  gsl_multimin_fminimizer_free(s);
  gsl_vector_free(x);
  gsl_vector_free(st);
  return result;
}

}  // namespace gpabc
