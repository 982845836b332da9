#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

namespace gpabc {

inline constexpr double kLog2Pi = 1.8378770664093454836;

inline double norm_pdf(double x) {
  return std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI);
}

inline double norm_cdf(double x) { return 0.5 * std::erfc(-x * M_SQRT1_2); }

/// log Phi(x), stable for large negative arguments.
double log_norm_cdf(double x);

/// Inverse standard normal CDF (Wichura's AS241, double precision).
double norm_cdf_inv(double p);

inline double logistic(double x) {
  if (x >= 0.0) {
    return 1.0 / (1.0 + std::exp(-x));
  }
  const double e = std::exp(x);
  return e / (1.0 + e);
}

/// log(1 + exp(x)) without overflow.
inline double log1p_exp(double x) {
  if (x > 35.0) return x;
  if (x < -35.0) return std::exp(x);
  return std::log1p(std::exp(x));
}

inline double logit(double p) { return std::log(p / (1.0 - p)); }

/// Location-scale Student-t log density.
double student_t_logpdf(double x, double location, double scale, double dof);

/// d/dx of student_t_logpdf.
double student_t_logpdf_dx(double x, double location, double scale, double dof);

/// Sorted copy helper used by the trimmed statistics below.
std::vector<double> sorted_copy(const std::vector<double>& v);

/// Symmetrically trimmed values: drops floor(trim/2 * n) entries from each
/// tail of the sorted sample. trim = 0.10 drops the lowest and highest 5%.
std::vector<double> trimmed_values(const std::vector<double>& v, double trim = 0.10);

double mean_of(const std::vector<double>& v);

/// Sample variance (n-1 denominator); returns 0 for fewer than two values.
double variance_of(const std::vector<double>& v);

double trimmed_mean(const std::vector<double>& v, double trim = 0.10);
double trimmed_sd(const std::vector<double>& v, double trim = 0.10);
double trimmed_variance(const std::vector<double>& v, double trim = 0.10);

double median_of(std::vector<double> v);

/// Gauss-Hermite rule: integral of f(x) exp(-x^2) dx ~ sum w_i f(x_i).
struct GaussHermite32 {
  static const double nodes[32];
  static const double weights[32];
};

/// E[logistic(Z)] for Z ~ N(mean, var), via 32-node Gauss-Hermite quadrature.
double gauss_hermite_logistic_mean(double mean, double var);

}  // namespace gpabc
