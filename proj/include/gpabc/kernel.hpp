#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "gpabc/linalg.hpp"
#include "gpabc/prior_box.hpp"
#include "gpabc/rng.hpp"

namespace gpabc {

/// Squared-exponential hyperparameters. noise_variance is meaningful for
/// regression only; latent-GP uses (classifier, noise process) pass 0.
struct SEHyperparams {
  double signal_variance = 1.0;      // sigma_f^2
  Eigen::VectorXd lengthscales;      // l_1..l_p, strictly positive
  double noise_variance = 0.0;       // sigma^2 >= 0

  int dim() const { return static_cast<int>(lengthscales.size()); }
  void validate() const;  // throws ContractError on violated invariants
};

/// Student-t prior for one positive hyperparameter, parameterized on the
/// natural (untransformed) scale.
struct StudentTPrior {
  double location = 0.0;
  double scale = 1.0;
  double dof = 4.0;

  double logpdf(double x) const;
  double logpdf_dx(double x) const;
  /// Draw clamped to location +/- 3*scale and floored away from zero; used
  /// to seed optimizer restarts.
  double sample_clamped(RngStream& rng) const;
};

enum class SurrogateKind { kStandard, kInputDependent, kClassifier };

std::string to_string(SurrogateKind kind);

/// Per-hyperparameter prior assignments for one surrogate kind, following
/// the recipes derived from the prior-box ranges and the trimmed standard
/// deviation of the observed discrepancies. Priors are placed on the natural
/// scale (lengthscales and signal/noise standard deviations); optimization
/// happens in log space, so the log-prior accessors below include the
/// Jacobian of the log transformation.
struct HyperPriorSpec {
  SurrogateKind kind = SurrogateKind::kStandard;
  std::vector<StudentTPrior> lengthscale;        // l (standard/classifier) or l_f
  std::vector<StudentTPrior> noise_lengthscale;  // l_g (input-dependent only)
  std::optional<StudentTPrior> signal_sd;        // prior on sigma_f
  std::optional<StudentTPrior> noise_signal_sd;  // prior on sigma_g (input-dependent)
  bool flat = false;  // test hook: all contributions are zero

  /// All-improper prior of matching shape; for algebraic tests only.
  static HyperPriorSpec improper(SurrogateKind kind, int p);

  void validate(int p) const;
};

/// k(a, b) = sigma_f^2 exp(-sum_i (a_i - b_i)^2 / (2 l_i^2)).
double se_covariance(const Eigen::VectorXd& a, const Eigen::VectorXd& b,
                     const SEHyperparams& h);

/// Pure kernel Gram matrix (no noise term) for rows of `points` (t x p).
Eigen::MatrixXd se_gram(const Eigen::MatrixXd& points, const SEHyperparams& h);

/// Cross-covariance vector k_t(q) against the training rows.
Eigen::VectorXd se_cross(const Eigen::MatrixXd& points, const Eigen::VectorXd& q,
                         const SEHyperparams& h);

/// K_ij = k(x_i, x_j) + (sigma^2 + jitter) 1{i=j}.
Eigen::MatrixXd covariance_matrix(const Eigen::MatrixXd& points,
                                  const SEHyperparams& h, double jitter);

/// Appendix recipes for the default hyperpriors of each surrogate kind.
/// `discrepancies` are on the scale the surrogate will be fitted on.
HyperPriorSpec default_hyperpriors(SurrogateKind kind, const PriorBox& box,
                                   const std::vector<double>& discrepancies);

}  // namespace gpabc
