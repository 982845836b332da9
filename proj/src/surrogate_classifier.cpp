#include "gpabc/surrogate_classifier.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "gpabc/errors.hpp"
#include "gpabc/mathutil.hpp"
#include "gpabc/optim.hpp"
#include "gpabc/rng.hpp"

namespace gpabc {

namespace {

struct LikEval {
  double loglik = 0.0;
  Eigen::VectorXd grad;
  Eigen::VectorXd w;  // -d^2 loglik / df^2 (nonnegative for both links)
};

LikEval eval_classification_lik(const Eigen::VectorXd& f, const Eigen::VectorXi& z,
                                LinkKind link) {
  const Eigen::Index t = f.size();
  LikEval out;
  out.grad.resize(t);
  out.w.resize(t);
  if (link == LinkKind::kLogit) {
    for (Eigen::Index i = 0; i < t; ++i) {
      const double zf = z(i) * f(i);
      out.loglik += -log1p_exp(-zf);
      const double pi = logistic(f(i));
      out.grad(i) = 0.5 * (z(i) + 1) - pi;
      out.w(i) = pi * (1.0 - pi);
    }
  } else {
    for (Eigen::Index i = 0; i < t; ++i) {
      const double zf = z(i) * f(i);
      const double lcdf = log_norm_cdf(zf);
      out.loglik += lcdf;
      const double ratio = std::exp(-0.5 * zf * zf - 0.5 * kLog2Pi - lcdf);
      out.grad(i) = z(i) * ratio;
      out.w(i) = ratio * (ratio + zf);
      if (out.w(i) < 0.0) out.w(i) = 0.0;
    }
  }
  return out;
}

struct ModeResult {
  Eigen::VectorXd f;
  Eigen::VectorXd a;  // K^{-1} (f - m0)
  LikEval lik;
  Eigen::VectorXd sqrt_w;
  CholeskyResult chol_b;
  double psi = 0.0;
  double grad_norm = 0.0;
  bool converged = false;
};

// Newton mode search, GPML algorithm 3.1 with a constant prior mean and a
// halving line search on the objective psi(f) = loglik - (f-m0)' a / 2.
ModeResult find_mode(const Eigen::MatrixXd& K, const Eigen::VectorXi& z, LinkKind link,
                     double m0, int max_iter, double tol) {
  const Eigen::Index t = K.rows();
  ModeResult st;
  st.f = Eigen::VectorXd::Constant(t, m0);
  st.a = Eigen::VectorXd::Zero(t);
  st.lik = eval_classification_lik(st.f, z, link);
  st.psi = st.lik.loglik;

  for (int iter = 0; iter < max_iter; ++iter) {
    const Eigen::VectorXd grad_psi = st.lik.grad - st.a;
    st.grad_norm = grad_psi.norm();
    if (st.grad_norm < tol) {
      st.converged = true;
      break;
    }
    st.sqrt_w = st.lik.w.cwiseMax(0.0).cwiseSqrt();
    Eigen::MatrixXd B = st.sqrt_w.asDiagonal() * K * st.sqrt_w.asDiagonal();
    B.diagonal().array() += 1.0;
    st.chol_b = cholesky_with_jitter(B);

    const Eigen::VectorXd fc = st.f.array() - m0;
    const Eigen::VectorXd b = st.lik.w.cwiseProduct(fc) + st.lik.grad;
    const Eigen::VectorXd kb = K * b;
    const Eigen::VectorXd v = st.chol_b.solve(Eigen::VectorXd(st.sqrt_w.cwiseProduct(kb)));
    const Eigen::VectorXd a_new = b - st.sqrt_w.cwiseProduct(v);

    double step = 1.0;
    bool accepted = false;
    for (int halve = 0; halve < 40; ++halve) {
      const Eigen::VectorXd a_try = st.a + step * (a_new - st.a);
      const Eigen::VectorXd f_try = (K * a_try).array() + m0;
      const LikEval lik_try = eval_classification_lik(f_try, z, link);
      const Eigen::VectorXd fc_try = f_try.array() - m0;
      const double psi_try = lik_try.loglik - 0.5 * a_try.dot(fc_try);
      if (std::isfinite(psi_try) && psi_try >= st.psi - 1e-12) {
        st.a = a_try;
        st.f = f_try;
        st.lik = lik_try;
        st.psi = psi_try;
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;
  }

  // Final curvature caches at the accepted point.
  st.sqrt_w = st.lik.w.cwiseMax(0.0).cwiseSqrt();
  Eigen::MatrixXd B = st.sqrt_w.asDiagonal() * K * st.sqrt_w.asDiagonal();
  B.diagonal().array() += 1.0;
  st.chol_b = cholesky_with_jitter(B);
  st.grad_norm = (st.lik.grad - st.a).norm();
  st.converged = st.grad_norm < tol;
  return st;
}

double kernel_log_hyperprior(const SEHyperparams& h, const HyperPriorSpec& priors) {
  if (priors.flat) return 0.0;
  const double sf = std::sqrt(h.signal_variance);
  double acc = priors.signal_sd->logpdf(sf) + std::log(sf) - std::log(2.0);
  for (int j = 0; j < h.dim(); ++j) {
    const double l = h.lengthscales(j);
    acc += priors.lengthscale[static_cast<std::size_t>(j)].logpdf(l) + std::log(l);
  }
  return acc;
}

}  // namespace

std::string to_string(LinkKind link) {
  return link == LinkKind::kLogit ? "logit" : "probit";
}

LinkKind link_from_string(const std::string& tag) {
  if (tag == "logit") return LinkKind::kLogit;
  if (tag == "probit") return LinkKind::kProbit;
  throw ContractError("unknown link '" + tag + "' (expected logit|probit)");
}

int ClassifiedTrainingSet::positives() const {
  int n = 0;
  for (Eigen::Index i = 0; i < labels.size(); ++i) {
    if (labels(i) > 0) ++n;
  }
  return n;
}

ClassifiedTrainingSet classify_training(const Eigen::MatrixXd& params,
                                        const std::vector<double>& raw_deltas,
                                        double eps) {
  if (static_cast<Eigen::Index>(raw_deltas.size()) != params.rows()) {
    throw ContractError("classify_training: row count mismatch");
  }
  ClassifiedTrainingSet out;
  out.params = params;
  out.eps_used = eps;
  out.labels.resize(params.rows());
  for (Eigen::Index i = 0; i < params.rows(); ++i) {
    out.labels(i) = raw_deltas[static_cast<std::size_t>(i)] <= eps ? 1 : -1;
  }
  return out;
}

ClassifierGPFit laplace_classifier_fit(const ClassifiedTrainingSet& data,
                                       const SEHyperparams& h, LinkKind link,
                                       double prior_mean_const, int max_iterations,
                                       double grad_tolerance) {
  h.validate();
  if (data.t() < 2) {
    throw ContractError("laplace_classifier_fit: need at least two points");
  }
  SEHyperparams hk = h;
  hk.noise_variance = 0.0;
  const Eigen::MatrixXd K = se_gram(data.params, hk);
  ModeResult mode =
      find_mode(K, data.labels, link, prior_mean_const, max_iterations, grad_tolerance);
  if (!mode.converged) {
    throw FitError("laplace_classifier_fit: Newton did not reach gradient norm " +
                   std::to_string(grad_tolerance) + " (got " +
                   std::to_string(mode.grad_norm) + ")");
  }
  ClassifierGPFit fit;
  fit.hyperparams = hk;
  fit.link = link;
  fit.prior_mean_const = prior_mean_const;
  fit.training = data;
  fit.latent_mode = mode.f;
  fit.loglik_grad = mode.lik.grad;
  fit.sqrt_w = mode.sqrt_w;
  fit.chol_b = mode.chol_b;
  fit.mode_grad_norm = mode.grad_norm;
  // log q(z | X, h) = psi(f_hat) - 1/2 log det B.
  fit.evidence = mode.psi - 0.5 * mode.chol_b.log_det;
  return fit;
}

ClassifierGPFit fit_classifier_gp(const TrainingSet& raw_training, double eps,
                                  const HyperPriorSpec& priors, LinkKind link,
                                  std::uint64_t seed, const ClassifierFitOptions& opts) {
  raw_training.validate();
  if (raw_training.t() < 2) {
    throw ContractError("fit_classifier_gp: need at least two points");
  }
  if (raw_training.transform_tag != Transform::kSe) {
    throw ContractError(
        "fit_classifier_gp: labels are defined on the raw discrepancy scale");
  }
  priors.validate(raw_training.p());

  const ClassifiedTrainingSet data =
      classify_training(raw_training.params, raw_training.discrepancies_std(), eps);
  const int pos = data.positives();
  if (pos == 0 || pos == data.t()) {
    throw DegenerateLabelsError("fit_classifier_gp: all labels are " +
                                std::string(pos == 0 ? "-1" : "+1") +
                                "; enlarge the threshold or use another surrogate");
  }

  double rate = std::isnan(opts.q_level)
                    ? static_cast<double>(pos) / static_cast<double>(data.t())
                    : opts.q_level;
  rate = std::clamp(rate, 1e-6, 0.499);
  const double m0 =
      link == LinkKind::kLogit ? logit(rate) : norm_cdf_inv(rate);

  const int p = raw_training.p();
  // Cache the mode across objective evaluations inside one restart; the
  // returned fit is rebuilt from scratch at the winning hyperparameters.
  Objective objective = [&](const Eigen::VectorXd& x) {
    SEHyperparams h;
    h.signal_variance = std::exp(x(0));
    h.lengthscales.resize(p);
    for (int j = 0; j < p; ++j) h.lengthscales(j) = std::exp(x(1 + j));
    h.noise_variance = 0.0;
    const ClassifierGPFit f = laplace_classifier_fit(
        data, h, link, m0, opts.newton_max_iterations, opts.newton_grad_tolerance);
    return -(f.evidence + kernel_log_hyperprior(h, priors));
  };

  bool have_best = false;
  OptimResult best;
  int best_index = -1;
  std::string failures;
  NelderMeadOptions nm;
  nm.max_iterations = opts.nm_max_iterations;
  nm.size_tolerance = opts.nm_tolerance;

  for (int k = 0; k < opts.restarts; ++k) {
    RngStream rng(derive_seed(seed, static_cast<std::uint64_t>(k)));
    Eigen::VectorXd x0(p + 1);
    if (priors.flat) {
      x0(0) = rng.normal(0.0, 1.0);
      for (int j = 0; j < p; ++j) x0(1 + j) = rng.normal(0.0, 1.0);
    } else {
      x0(0) = 2.0 * std::log(priors.signal_sd->sample_clamped(rng));
      for (int j = 0; j < p; ++j) {
        x0(1 + j) =
            std::log(priors.lengthscale[static_cast<std::size_t>(j)].sample_clamped(rng));
      }
    }
    OptimResult res =
        minimize_nelder_mead(objective, x0, Eigen::VectorXd::Constant(p + 1, 0.5), nm);
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
    throw FitError("fit_classifier_gp: all restarts failed (" + failures + ")");
  }

  SEHyperparams h;
  h.signal_variance = std::exp(best.x(0));
  h.lengthscales.resize(p);
  for (int j = 0; j < p; ++j) h.lengthscales(j) = std::exp(best.x(1 + j));
  h.noise_variance = 0.0;

  ClassifierGPFit fit = laplace_classifier_fit(
      data, h, link, m0, opts.newton_max_iterations, opts.newton_grad_tolerance);
  fit.objective = -best.value;
  fit.winning_restart = best_index;
  return fit;
}

namespace {

struct LatentPrediction {
  double mean = 0.0;
  double variance = 0.0;
};

LatentPrediction latent_predict(const ClassifierGPFit& fit, const Eigen::VectorXd& q) {
  if (q.size() != fit.training.params.cols()) {
    throw ContractError("class_probability: query dimension mismatch");
  }
  const Eigen::VectorXd k = se_cross(fit.training.params, q, fit.hyperparams);
  LatentPrediction out;
  out.mean = fit.prior_mean_const + k.dot(fit.loglik_grad);
  const Eigen::VectorXd v = fit.chol_b.half_solve(fit.sqrt_w.cwiseProduct(k));
  out.variance = std::max(0.0, fit.hyperparams.signal_variance - v.squaredNorm());
  return out;
}

}  // namespace

double class_probability(const ClassifierGPFit& fit, const Eigen::VectorXd& q) {
  const LatentPrediction pred = latent_predict(fit, q);
  double p;
  if (fit.link == LinkKind::kProbit) {
    p = norm_cdf(pred.mean / std::sqrt(1.0 + pred.variance));
  } else {
    p = gauss_hermite_logistic_mean(pred.mean, pred.variance);
  }
  return std::clamp(p, std::numeric_limits<double>::min(),
                    1.0 - std::numeric_limits<double>::epsilon() / 2);
}

std::pair<double, double> log_class_probability_pair(const ClassifierGPFit& fit,
                                                     const Eigen::VectorXd& q) {
  const double p = class_probability(fit, q);
  return {std::log(p), std::log1p(-p)};
}

}  // namespace gpabc
