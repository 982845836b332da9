#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <utility>

#include "gpabc/kernel.hpp"
#include "gpabc/linalg.hpp"
#include "gpabc/training.hpp"

namespace gpabc {

/// Standard GP regression fit on (transformed) discrepancies. Immutable once
/// constructed; queries are safe from concurrent threads.
struct StandardGPFit {
  SEHyperparams hyperparams;
  TrainingSet training;
  CholeskyResult factorization;  // Cholesky of K_t (+ escalated jitter)
  Eigen::VectorXd weights;       // K_t^{-1} (delta - m0)
  double prior_mean_const = 0.0;

  // Fit diagnostics.
  double objective = 0.0;  // penalized marginal log likelihood at the optimum
  double grad_norm = 0.0;  // in the optimizer's log-hyperparameter space
  int winning_restart = -1;
};

struct StandardFitOptions {
  int restarts = 10;
  int max_iterations = 200;
  double grad_tolerance = 1e-6;
};

/// Constant prior mean implied by the training transform: the 10%-trimmed
/// mean of log-discrepancies clamped to <= 0 under the log transform, zero
/// otherwise.
double standard_prior_mean(const TrainingSet& training);

/// MAP hyperparameter fit by multi-start BFGS on the penalized marginal log
/// likelihood, best restart wins (ties broken by lowest restart index).
/// Deterministic for fixed (training, priors, seed).
StandardGPFit fit_standard_gp(const TrainingSet& training, const HyperPriorSpec& priors,
                              std::uint64_t seed, const StandardFitOptions& opts = {});

/// Conditions on the training data with fixed hyperparameters (no
/// optimization); used for large training sets and for degeneracy checks.
StandardGPFit condition_standard_gp(const TrainingSet& training,
                                    const SEHyperparams& hyperparams,
                                    double prior_mean_const);

struct GPPrediction {
  double mean = 0.0;
  double latent_variance = 0.0;
};

GPPrediction predict(const StandardGPFit& fit, const Eigen::VectorXd& q);

/// P(Delta_theta <= eps) = Phi((eps - mu) / sqrt(v + sigma^2)); eps must be
/// expressed in the training transform's scale.
double tail_probability(const StandardGPFit& fit, const Eigen::VectorXd& q, double eps);

/// (log P, log(1 - P)) computed stably through the normal log-CDF.
std::pair<double, double> log_tail_probability_pair(const StandardGPFit& fit,
                                                    const Eigen::VectorXd& q, double eps);

/// Gaussian log density of `delta` under the predictive N(mu, v + sigma^2).
double log_predictive_density(const StandardGPFit& fit, const Eigen::VectorXd& q,
                              double delta);

/// Penalized Gaussian marginal log likelihood and its gradient with respect
/// to the log hyperparameters (log sigma_f^2, log l_1..log l_p, log sigma^2).
/// The hyperprior contribution includes the Jacobian of the log transform.
std::pair<double, Eigen::VectorXd> marginal_loglik_and_gradient(
    const TrainingSet& training, const SEHyperparams& h, const HyperPriorSpec& priors);

}  // namespace gpabc
