#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <utility>

#include "gpabc/kernel.hpp"
#include "gpabc/linalg.hpp"
#include "gpabc/training.hpp"

namespace gpabc {

/// Hyperparameters of the two latent processes: signal f and log-variance g.
/// fixed_noise (sigma^2) is NOT optimized; it anchors the noise scale so the
/// covariance hyperparameters stay identifiable.
struct InputDepHyperparams {
  double signal_variance = 1.0;        // sigma_f^2
  Eigen::VectorXd lengthscales_f;      // l_f, one per dimension
  double noise_signal_variance = 1.0;  // sigma_g^2
  Eigen::VectorXd lengthscales_g;      // l_g
  double fixed_noise = 1.0;            // sigma^2 > 0

  int dim() const { return static_cast<int>(lengthscales_f.size()); }
  void validate() const;

  SEHyperparams f_kernel() const;
  SEHyperparams g_kernel() const;
};

/// Laplace fit of the input-dependent noise model
/// delta_i ~ N(f(theta_i), sigma^2 exp(g(theta_i))).
struct InputDepGPFit {
  InputDepHyperparams hyperparams;
  TrainingSet training;
  double prior_mean_const = 0.0;  // f-process constant mean (log transform)

  Eigen::VectorXd mode_f;
  Eigen::VectorXd mode_g;
  CholeskyResult chol_kf;
  CholeskyResult chol_kg;
  Eigen::VectorXd alpha_f;  // Kf^{-1} (f_hat - m0)
  Eigen::VectorXd alpha_g;  // Kg^{-1} g_hat
  CholeskyResult chol_h;    // factor of (K^{-1} + W) at the mode, 2t x 2t

  double evidence = 0.0;
  double objective = 0.0;
  double mode_grad_norm = 0.0;
  int winning_restart = -1;
};

struct InputDepFitOptions {
  int restarts = 5;
  int newton_max_iterations = 100;
  double newton_grad_tolerance = 1e-6;
  int nm_max_iterations = 250;
  double nm_tolerance = 2e-3;
};

/// Laplace fit with fixed hyperparameters; Newton with step damping and a
/// backtracking line search on the 2t-dimensional log joint.
InputDepGPFit laplace_inputdep_fit(const TrainingSet& training,
                                   const InputDepHyperparams& h,
                                   double prior_mean_const,
                                   int max_iterations = 100,
                                   double grad_tolerance = 1e-6);

/// MAP over the Laplace evidence with multi-start Nelder-Mead (sigma^2 is
/// fixed to the 10%-trimmed sample variance of the discrepancies).
InputDepGPFit fit_inputdep_gp(const TrainingSet& training, const HyperPriorSpec& priors,
                              std::uint64_t seed, const InputDepFitOptions& opts = {});

struct InputDepPrediction {
  double mean = 0.0;
  double latent_variance = 0.0;
  double noise_variance = 0.0;  // sigma^2 exp(mu_g + v_g / 2)
};

InputDepPrediction predict_inputdep(const InputDepGPFit& fit, const Eigen::VectorXd& q);

double tail_probability_inputdep(const InputDepGPFit& fit, const Eigen::VectorXd& q,
                                 double eps);

std::pair<double, double> log_tail_probability_pair_inputdep(const InputDepGPFit& fit,
                                                             const Eigen::VectorXd& q,
                                                             double eps);

double log_predictive_density_inputdep(const InputDepGPFit& fit,
                                       const Eigen::VectorXd& q, double delta);

}  // namespace gpabc
