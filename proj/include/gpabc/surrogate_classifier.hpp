#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <limits>
#include <utility>

#include "gpabc/kernel.hpp"
#include "gpabc/linalg.hpp"
#include "gpabc/training.hpp"

namespace gpabc {

enum class LinkKind { kLogit, kProbit };

std::string to_string(LinkKind link);
LinkKind link_from_string(const std::string& tag);

/// Binary labels z_i = 2 * 1{delta_i <= eps} - 1 on the raw discrepancy
/// scale, together with the threshold that produced them.
struct ClassifiedTrainingSet {
  Eigen::MatrixXd params;
  Eigen::VectorXi labels;  // +1 below threshold, -1 above
  double eps_used = 0.0;

  int t() const { return static_cast<int>(params.rows()); }
  int positives() const;
};

ClassifiedTrainingSet classify_training(const Eigen::MatrixXd& params,
                                        const std::vector<double>& raw_deltas,
                                        double eps);

/// GP binary classification fit (Laplace approximation at the latent mode).
struct ClassifierGPFit {
  SEHyperparams hyperparams;  // noise_variance unused (0)
  LinkKind link = LinkKind::kLogit;
  double prior_mean_const = 0.0;  // negative constant prior mean
  ClassifiedTrainingSet training;

  Eigen::VectorXd latent_mode;
  Eigen::VectorXd loglik_grad;  // at the mode; predictive mean weights
  Eigen::VectorXd sqrt_w;
  CholeskyResult chol_b;  // factor of B = I + W^1/2 K W^1/2

  double evidence = 0.0;  // Laplace log marginal likelihood
  double objective = 0.0;  // evidence + log hyperprior at the MAP
  double mode_grad_norm = 0.0;
  int winning_restart = -1;
};

struct ClassifierFitOptions {
  int restarts = 5;
  int newton_max_iterations = 100;
  double newton_grad_tolerance = 1e-6;
  int nm_max_iterations = 200;
  double nm_tolerance = 1e-3;
  /// Quantile level that produced eps; sets prior_mean_const = link^{-1}(q).
  /// NaN = use the empirical positive rate.
  double q_level = std::numeric_limits<double>::quiet_NaN();
};

/// Laplace fit with fixed hyperparameters (no optimization).
ClassifierGPFit laplace_classifier_fit(const ClassifiedTrainingSet& data,
                                       const SEHyperparams& h, LinkKind link,
                                       double prior_mean_const,
                                       int max_iterations = 100,
                                       double grad_tolerance = 1e-6);

/// Full fit: labels from the raw-scale training set and threshold, MAP
/// hyperparameters over the Laplace evidence with multi-start Nelder-Mead.
/// Throws DegenerateLabelsError when only one class is present.
ClassifierGPFit fit_classifier_gp(const TrainingSet& raw_training, double eps,
                                  const HyperPriorSpec& priors, LinkKind link,
                                  std::uint64_t seed,
                                  const ClassifierFitOptions& opts = {});

/// Approximate predictive probability P(z = +1 | q), strictly inside (0,1).
/// Probit integrates in closed form; logit uses 32-node Gauss-Hermite.
double class_probability(const ClassifierGPFit& fit, const Eigen::VectorXd& q);

/// (log P, log(1 - P)).
std::pair<double, double> log_class_probability_pair(const ClassifierGPFit& fit,
                                                     const Eigen::VectorXd& q);

}  // namespace gpabc
