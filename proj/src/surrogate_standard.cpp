#include "gpabc/surrogate_standard.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "gpabc/errors.hpp"
#include "gpabc/mathutil.hpp"
#include "gpabc/optim.hpp"

namespace gpabc {

namespace {

// Gaussian marginal log likelihood and gradient with respect to the natural
// parameters, evaluated at the factorized covariance. Gradient layout:
// (d/d sigma_f^2 * sigma_f^2, d/d l_j * l_j, d/d sigma^2) i.e. the first
// p+1 entries are already in log-space form, the noise entry is natural.
struct CoreEval {
  double value = 0.0;
  double g_log_sf2 = 0.0;
  Eigen::VectorXd g_log_l;
  double g_sigma2_natural = 0.0;  // d value / d sigma^2
};

CoreEval core_marginal(const TrainingSet& training, const SEHyperparams& h,
                       double prior_mean) {
  const Eigen::Index t = training.params.rows();
  const int p = training.p();

  Eigen::MatrixXd S = se_gram(training.params, h);  // sigma_f^2 R, no noise
  Eigen::MatrixXd K = S;
  K.diagonal().array() += h.noise_variance;
  CholeskyResult chol = cholesky_with_jitter(K);

  Eigen::VectorXd r = training.discrepancies.array() - prior_mean;
  Eigen::VectorXd alpha = chol.solve(r);

  CoreEval out;
  out.value = -0.5 * r.dot(alpha) - 0.5 * chol.log_det -
              0.5 * static_cast<double>(t) * kLog2Pi;

  Eigen::MatrixXd Kinv = chol.inverse();
  // M = (alpha alpha^T - K^{-1}) .* S drives every kernel-parameter trace.
  Eigen::MatrixXd M = ((alpha * alpha.transpose()) - Kinv).cwiseProduct(S);
  out.g_log_sf2 = 0.5 * M.sum();
  out.g_log_l.resize(p);
  for (int j = 0; j < p; ++j) {
    const Eigen::VectorXd c = training.params.col(j);
    const Eigen::MatrixXd diff =
        c.replicate(1, t) - c.transpose().replicate(t, 1);
    out.g_log_l(j) = 0.5 * M.cwiseProduct(diff.array().square().matrix()).sum() /
                     (h.lengthscales(j) * h.lengthscales(j));
  }
  out.g_sigma2_natural = 0.5 * (alpha.squaredNorm() - Kinv.trace());
  return out;
}

// Log hyperprior over (log sigma_f^2, log l_j) plus the log-space Jacobian;
// sigma^2 carries an improper uniform prior and contributes nothing.
double log_hyperprior(const SEHyperparams& h, const HyperPriorSpec& priors,
                      Eigen::VectorXd* grad_log) {
  const int p = h.dim();
  if (grad_log) grad_log->setZero(p + 2);
  if (priors.flat) return 0.0;
  double acc = 0.0;
  const double sf = std::sqrt(h.signal_variance);
  acc += priors.signal_sd->logpdf(sf) + std::log(sf) - std::log(2.0);
  if (grad_log) (*grad_log)(0) = 0.5 * priors.signal_sd->logpdf_dx(sf) * sf + 0.5;
  for (int j = 0; j < p; ++j) {
    const double l = h.lengthscales(j);
    acc += priors.lengthscale[static_cast<std::size_t>(j)].logpdf(l) + std::log(l);
    if (grad_log) {
      (*grad_log)(1 + j) =
          priors.lengthscale[static_cast<std::size_t>(j)].logpdf_dx(l) * l + 1.0;
    }
  }
  return acc;
}

}  // namespace

double standard_prior_mean(const TrainingSet& training) {
  if (training.transform_tag != Transform::kLog) return 0.0;
  return std::min(0.0, trimmed_mean(training.discrepancies_std()));
}

std::pair<double, Eigen::VectorXd> marginal_loglik_and_gradient(
    const TrainingSet& training, const SEHyperparams& h, const HyperPriorSpec& priors) {
  training.validate();
  h.validate();
  priors.validate(training.p());
  const int p = training.p();
  const double m0 = standard_prior_mean(training);

  const CoreEval core = core_marginal(training, h, m0);
  Eigen::VectorXd prior_grad;
  const double prior_val = log_hyperprior(h, priors, &prior_grad);

  Eigen::VectorXd grad(p + 2);
  grad(0) = core.g_log_sf2 + prior_grad(0);
  for (int j = 0; j < p; ++j) grad(1 + j) = core.g_log_l(j) + prior_grad(1 + j);
  grad(p + 1) = core.g_sigma2_natural * h.noise_variance;
  return {core.value + prior_val, grad};
}

StandardGPFit fit_standard_gp(const TrainingSet& training, const HyperPriorSpec& priors,
                              std::uint64_t seed, const StandardFitOptions& opts) {
  training.validate();
  if (training.t() < 2) {
    throw ContractError("fit_standard_gp: at least two training points required");
  }
  priors.validate(training.p());
  const int p = training.p();
  const std::vector<double> deltas = training.discrepancies_std();
  const double m0 = standard_prior_mean(training);
  const double var_delta = std::max(variance_of(deltas), 1e-300);
  const double noise_floor = 1e-10 * var_delta;

  // Optimization variables: (log sigma_f^2, log l_1..p, z) with
  // sigma^2 = floor + exp(z); the floor keeps the improper-uniform noise
  // prior away from exact degeneracy while the parametrization stays smooth.
  const auto sigma2_of = [&](double z) { return noise_floor + std::exp(z); };

  GradObjective objective = [&](const Eigen::VectorXd& x, Eigen::VectorXd* grad) {
    SEHyperparams h;
    h.signal_variance = std::exp(x(0));
    h.lengthscales.resize(p);
    for (int j = 0; j < p; ++j) h.lengthscales(j) = std::exp(x(1 + j));
    h.noise_variance = sigma2_of(x(p + 1));

    const CoreEval core = core_marginal(training, h, m0);
    Eigen::VectorXd prior_grad;
    const double prior_val = log_hyperprior(h, priors, &prior_grad);
    if (grad) {
      grad->resize(p + 2);
      (*grad)(0) = -(core.g_log_sf2 + prior_grad(0));
      for (int j = 0; j < p; ++j) (*grad)(1 + j) = -(core.g_log_l(j) + prior_grad(1 + j));
      (*grad)(p + 1) = -core.g_sigma2_natural * std::exp(x(p + 1));
    }
    return -(core.value + prior_val);
  };

  BfgsOptions bopts;
  bopts.max_iterations = opts.max_iterations;
  bopts.grad_tolerance = opts.grad_tolerance;

  bool have_best = false;
  OptimResult best;
  int best_index = -1;
  std::string failures;

  for (int k = 0; k < opts.restarts; ++k) {
    RngStream rng(derive_seed(seed, static_cast<std::uint64_t>(k)));
    Eigen::VectorXd x0(p + 2);
    if (priors.flat) {
      x0(0) = std::log(std::max(var_delta, 1e-12)) + rng.normal(0.0, 0.5);
      for (int j = 0; j < p; ++j) x0(1 + j) = rng.normal(0.0, 0.5);
    } else {
      const double sf0 = priors.signal_sd->sample_clamped(rng);
      x0(0) = 2.0 * std::log(sf0);
      for (int j = 0; j < p; ++j) {
        x0(1 + j) =
            std::log(priors.lengthscale[static_cast<std::size_t>(j)].sample_clamped(rng));
      }
    }
    const double s2_0 = var_delta * rng.uniform(0.1, 0.9);
    x0(p + 1) = std::log(std::max(s2_0 - noise_floor, 1e-300));

    OptimResult res = minimize_bfgs(objective, x0, bopts);
    if (res.failed || !std::isfinite(res.value)) {
      failures += "restart " + std::to_string(k) + " failed; ";
      continue;
    }
    if (!have_best || res.value < best.value) {
      best = res;
      best_index = k;
      have_best = true;
    }
  }
  if (!have_best) {
    throw FitError("fit_standard_gp: all restarts failed numerically (" + failures +
                   "t=" + std::to_string(training.t()) + ")");
  }

  SEHyperparams h;
  h.signal_variance = std::exp(best.x(0));
  h.lengthscales.resize(p);
  for (int j = 0; j < p; ++j) h.lengthscales(j) = std::exp(best.x(1 + j));
  h.noise_variance = sigma2_of(best.x(p + 1));

  StandardGPFit fit = condition_standard_gp(training, h, m0);
  fit.objective = -best.value;
  fit.grad_norm = best.grad_norm;
  fit.winning_restart = best_index;
  return fit;
}

StandardGPFit condition_standard_gp(const TrainingSet& training,
                                    const SEHyperparams& hyperparams,
                                    double prior_mean_const) {
  training.validate();
  hyperparams.validate();
  if (hyperparams.dim() != training.p()) {
    throw ContractError("condition_standard_gp: hyperparameter dimension mismatch");
  }
  StandardGPFit fit;
  fit.hyperparams = hyperparams;
  fit.training = training;
  fit.prior_mean_const = prior_mean_const;
  Eigen::MatrixXd K = covariance_matrix(training.params, hyperparams, 0.0);
  fit.factorization = cholesky_with_jitter(K);
  Eigen::VectorXd r = training.discrepancies.array() - prior_mean_const;
  fit.weights = fit.factorization.solve(r);
  return fit;
}

GPPrediction predict(const StandardGPFit& fit, const Eigen::VectorXd& q) {
  if (q.size() != fit.training.params.cols()) {
    throw ContractError("predict: query dimension mismatch");
  }
  const Eigen::VectorXd k = se_cross(fit.training.params, q, fit.hyperparams);
  GPPrediction out;
  out.mean = fit.prior_mean_const + k.dot(fit.weights);
  const Eigen::VectorXd half = fit.factorization.half_solve(k);
  out.latent_variance =
      std::max(0.0, fit.hyperparams.signal_variance - half.squaredNorm());
  return out;
}

double tail_probability(const StandardGPFit& fit, const Eigen::VectorXd& q, double eps) {
  const GPPrediction pred = predict(fit, q);
  const double s2 =
      std::max(pred.latent_variance + fit.hyperparams.noise_variance, 1e-300);
  return norm_cdf((eps - pred.mean) / std::sqrt(s2));
}

std::pair<double, double> log_tail_probability_pair(const StandardGPFit& fit,
                                                    const Eigen::VectorXd& q,
                                                    double eps) {
  const GPPrediction pred = predict(fit, q);
  const double s2 =
      std::max(pred.latent_variance + fit.hyperparams.noise_variance, 1e-300);
  const double z = (eps - pred.mean) / std::sqrt(s2);
  return {log_norm_cdf(z), log_norm_cdf(-z)};
}

double log_predictive_density(const StandardGPFit& fit, const Eigen::VectorXd& q,
                              double delta) {
  const GPPrediction pred = predict(fit, q);
  const double s2 =
      std::max(pred.latent_variance + fit.hyperparams.noise_variance, 1e-300);
  const double d = delta - pred.mean;
  return -0.5 * (kLog2Pi + std::log(s2)) - 0.5 * d * d / s2;
}

}  // namespace gpabc
