#include "gpabc/surrogate_inputdep.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "gpabc/errors.hpp"
#include "gpabc/mathutil.hpp"
#include "gpabc/optim.hpp"
#include "gpabc/rng.hpp"

namespace gpabc {

void InputDepHyperparams::validate() const {
  if (!(signal_variance > 0.0) || !(noise_signal_variance > 0.0) ||
      !(fixed_noise > 0.0)) {
    throw ContractError("InputDepHyperparams: variances must be positive");
  }
  if (lengthscales_f.size() == 0 || lengthscales_f.size() != lengthscales_g.size()) {
    throw ContractError("InputDepHyperparams: lengthscale vectors inconsistent");
  }
  for (Eigen::Index i = 0; i < lengthscales_f.size(); ++i) {
    if (!(lengthscales_f(i) > 0.0) || !(lengthscales_g(i) > 0.0)) {
      throw ContractError("InputDepHyperparams: lengthscales must be positive");
    }
  }
}

SEHyperparams InputDepHyperparams::f_kernel() const {
  return SEHyperparams{signal_variance, lengthscales_f, 0.0};
}

SEHyperparams InputDepHyperparams::g_kernel() const {
  return SEHyperparams{noise_signal_variance, lengthscales_g, 0.0};
}

namespace {

struct JointEval {
  double loglik = 0.0;
  Eigen::VectorXd grad_f, grad_g;
  Eigen::VectorXd wff, wfg, wgg;  // negative Hessian blocks of the likelihood
};

JointEval eval_joint_lik(const Eigen::VectorXd& delta, const Eigen::VectorXd& f,
                         const Eigen::VectorXd& g, double sigma2) {
  const Eigen::Index t = delta.size();
  JointEval out;
  out.grad_f.resize(t);
  out.grad_g.resize(t);
  out.wff.resize(t);
  out.wfg.resize(t);
  out.wgg.resize(t);
  const double log_norm = -0.5 * (kLog2Pi + std::log(sigma2));
  for (Eigen::Index i = 0; i < t; ++i) {
    const double r = delta(i) - f(i);
    const double inv_var = std::exp(-g(i)) / sigma2;
    out.loglik += log_norm - 0.5 * g(i) - 0.5 * r * r * inv_var;
    out.grad_f(i) = r * inv_var;
    out.grad_g(i) = -0.5 + 0.5 * r * r * inv_var;
    out.wff(i) = inv_var;
    out.wfg(i) = r * inv_var;
    out.wgg(i) = 0.5 * r * r * inv_var;
  }
  return out;
}

struct ModeState {
  Eigen::VectorXd zeta;  // whitened latent, u = m + L zeta
  Eigen::VectorXd f, g;
  JointEval lik;
  double psi = 0.0;  // loglik - |zeta|^2 / 2
  double grad_norm = 0.0;
  bool converged = false;
  CholeskyResult chol_h;  // factor of H = I + L^T W L at the mode
};

// Newton mode search in the whitened parametrization. Working in zeta keeps
// every evaluation a triangular solve away from the kernel factors; forming
// K^{-1} explicitly loses too much precision when the SE Gram matrices are
// jitter-limited. The likelihood Hessian is indefinite away from the mode,
// so the step solve escalates a ridge until it factorizes, then a
// backtracking line search enforces monotone progress in psi.
ModeState find_mode_whitened(const Eigen::VectorXd& delta, const Eigen::MatrixXd& lf,
                             const Eigen::MatrixXd& lg, double sigma2, double m0,
                             const Eigen::VectorXd& zeta0, int max_iter, double tol) {
  const Eigen::Index t = delta.size();
  ModeState st;
  st.zeta = zeta0;

  const auto latent_of = [&](const Eigen::VectorXd& zeta, Eigen::VectorXd* f,
                             Eigen::VectorXd* g) {
    *f = (lf.triangularView<Eigen::Lower>() * zeta.head(t)).array() + m0;
    *g = lg.triangularView<Eigen::Lower>() * zeta.tail(t);
  };

  latent_of(st.zeta, &st.f, &st.g);
  st.lik = eval_joint_lik(delta, st.f, st.g, sigma2);
  st.psi = st.lik.loglik - 0.5 * st.zeta.squaredNorm();

  Eigen::MatrixXd H(2 * t, 2 * t);
  Eigen::VectorXd grad(2 * t);
  for (int iter = 0; iter < max_iter; ++iter) {
    grad.head(t) = lf.transpose().triangularView<Eigen::Upper>() * st.lik.grad_f;
    grad.tail(t) = lg.transpose().triangularView<Eigen::Upper>() * st.lik.grad_g;
    grad -= st.zeta;
    st.grad_norm = grad.norm();
    if (st.grad_norm < tol) {
      st.converged = true;
      break;
    }

    const Eigen::MatrixXd wf_lf = st.lik.wff.asDiagonal() * lf;
    const Eigen::MatrixXd wx_lg = st.lik.wfg.asDiagonal() * lg;
    H.topLeftCorner(t, t) = lf.transpose() * wf_lf;
    H.topLeftCorner(t, t).diagonal().array() += 1.0;
    H.topRightCorner(t, t) = lf.transpose() * wx_lg;
    H.bottomLeftCorner(t, t) = H.topRightCorner(t, t).transpose();
    H.bottomRightCorner(t, t) = lg.transpose() * (st.lik.wgg.asDiagonal() * lg);
    H.bottomRightCorner(t, t).diagonal().array() += 1.0;

    double ridge = 0.0;
    Eigen::VectorXd step;
    bool factored = false;
    for (int attempt = 0; attempt < 16; ++attempt) {
      Eigen::MatrixXd Hd = H;
      if (ridge > 0.0) Hd.diagonal().array() += ridge;
      Eigen::LLT<Eigen::MatrixXd> llt(Hd);
      if (llt.info() == Eigen::Success) {
        step = llt.solve(grad);
        factored = true;
        break;
      }
      ridge = ridge == 0.0 ? 1e-10 * H.diagonal().mean() : ridge * 10.0;
    }
    if (!factored) break;

    double s = 1.0;
    bool accepted = false;
    const double slope = grad.dot(step);
    for (int halve = 0; halve < 50; ++halve) {
      const Eigen::VectorXd zeta_try = st.zeta + s * step;
      Eigen::VectorXd f_try, g_try;
      latent_of(zeta_try, &f_try, &g_try);
      const JointEval lik_try = eval_joint_lik(delta, f_try, g_try, sigma2);
      const double psi_try = lik_try.loglik - 0.5 * zeta_try.squaredNorm();
      if (std::isfinite(psi_try) && psi_try >= st.psi + 1e-4 * s * slope) {
        st.zeta = zeta_try;
        st.f = f_try;
        st.g = g_try;
        st.lik = lik_try;
        st.psi = psi_try;
        accepted = true;
        break;
      }
      s *= 0.5;
    }
    if (!accepted) break;
  }

  grad.head(t) = lf.transpose().triangularView<Eigen::Upper>() * st.lik.grad_f;
  grad.tail(t) = lg.transpose().triangularView<Eigen::Upper>() * st.lik.grad_g;
  grad -= st.zeta;
  st.grad_norm = grad.norm();
  st.converged = st.grad_norm < tol;

  const Eigen::MatrixXd wf_lf = st.lik.wff.asDiagonal() * lf;
  const Eigen::MatrixXd wx_lg = st.lik.wfg.asDiagonal() * lg;
  H.topLeftCorner(t, t) = lf.transpose() * wf_lf;
  H.topLeftCorner(t, t).diagonal().array() += 1.0;
  H.topRightCorner(t, t) = lf.transpose() * wx_lg;
  H.bottomLeftCorner(t, t) = H.topRightCorner(t, t).transpose();
  H.bottomRightCorner(t, t) = lg.transpose() * (st.lik.wgg.asDiagonal() * lg);
  H.bottomRightCorner(t, t).diagonal().array() += 1.0;
  st.chol_h = cholesky_with_jitter(H);
  return st;
}

double inputdep_log_hyperprior(const InputDepHyperparams& h,
                               const HyperPriorSpec& priors) {
  if (priors.flat) return 0.0;
  double acc = 0.0;
  const double sf = std::sqrt(h.signal_variance);
  acc += priors.signal_sd->logpdf(sf) + std::log(sf) - std::log(2.0);
  const double sg = std::sqrt(h.noise_signal_variance);
  acc += priors.noise_signal_sd->logpdf(sg) + std::log(sg) - std::log(2.0);
  for (int j = 0; j < h.dim(); ++j) {
    acc += priors.lengthscale[static_cast<std::size_t>(j)].logpdf(h.lengthscales_f(j)) +
           std::log(h.lengthscales_f(j));
    acc += priors.noise_lengthscale[static_cast<std::size_t>(j)].logpdf(
               h.lengthscales_g(j)) +
           std::log(h.lengthscales_g(j));
  }
  return acc;
}

double inputdep_prior_mean(const TrainingSet& training) {
  if (training.transform_tag != Transform::kLog) return 0.0;
  return std::min(0.0, trimmed_mean(training.discrepancies_std()));
}

struct LaplaceWork {
  CholeskyResult chol_kf, chol_kg;
  ModeState mode;
  double evidence = 0.0;
};

LaplaceWork run_laplace(const TrainingSet& training, const InputDepHyperparams& h,
                        double m0, const Eigen::VectorXd* warm_f,
                        const Eigen::VectorXd* warm_g, int max_iterations,
                        double grad_tolerance) {
  const Eigen::Index t = training.params.rows();
  LaplaceWork w;
  w.chol_kf = cholesky_with_jitter(se_gram(training.params, h.f_kernel()));
  w.chol_kg = cholesky_with_jitter(se_gram(training.params, h.g_kernel()));

  const auto whiten = [&](const Eigen::VectorXd& f, const Eigen::VectorXd& g) {
    Eigen::VectorXd zeta(2 * t);
    zeta.head(t) = w.chol_kf.half_solve(Eigen::VectorXd(f.array() - m0));
    zeta.tail(t) = w.chol_kg.half_solve(g);
    return zeta;
  };

  const Eigen::VectorXd f_default =
      Eigen::VectorXd::Constant(t, trimmed_mean(training.discrepancies_std()));
  const Eigen::VectorXd g_default = Eigen::VectorXd::Zero(t);
  const Eigen::VectorXd zeta_default = whiten(f_default, g_default);

  Eigen::VectorXd zeta0 = zeta_default;
  if (warm_f && warm_f->size() == t && warm_g && warm_g->size() == t) {
    const Eigen::VectorXd zeta_warm = whiten(*warm_f, *warm_g);
    // A warm start far outside the new kernels' span does more harm than good.
    if (zeta_warm.array().abs().maxCoeff() < 1e3) zeta0 = zeta_warm;
  }

  w.mode = find_mode_whitened(training.discrepancies, w.chol_kf.L, w.chol_kg.L,
                              h.fixed_noise, m0, zeta0, max_iterations,
                              grad_tolerance);
  if (!w.mode.converged && zeta0 != zeta_default) {
    w.mode = find_mode_whitened(training.discrepancies, w.chol_kf.L, w.chol_kg.L,
                                h.fixed_noise, m0, zeta_default, max_iterations,
                                grad_tolerance);
  }
  if (!w.mode.converged) {
    throw FitError("laplace_inputdep_fit: Newton did not converge (grad norm " +
                   std::to_string(w.mode.grad_norm) + ")");
  }
  // log Z = psi(mode) - 1/2 log det (I + L^T W L).
  w.evidence = w.mode.psi - 0.5 * w.mode.chol_h.log_det;
  return w;
}

}  // namespace

InputDepGPFit laplace_inputdep_fit(const TrainingSet& training,
                                   const InputDepHyperparams& h, double prior_mean_const,
                                   int max_iterations, double grad_tolerance) {
  training.validate();
  h.validate();
  if (h.dim() != training.p()) {
    throw ContractError("laplace_inputdep_fit: dimension mismatch");
  }
  LaplaceWork w = run_laplace(training, h, prior_mean_const, nullptr, nullptr,
                              max_iterations, grad_tolerance);

  InputDepGPFit fit;
  fit.hyperparams = h;
  fit.training = training;
  fit.prior_mean_const = prior_mean_const;
  fit.mode_f = w.mode.f;
  fit.mode_g = w.mode.g;
  // Mode stationarity gives Kf^{-1}(f_hat - m0) = grad_f loglik(mode) and
  // likewise for g; the gradients are the numerically exact version.
  fit.alpha_f = w.mode.lik.grad_f;
  fit.alpha_g = w.mode.lik.grad_g;
  fit.chol_kf = std::move(w.chol_kf);
  fit.chol_kg = std::move(w.chol_kg);
  fit.chol_h = std::move(w.mode.chol_h);
  fit.mode_grad_norm = w.mode.grad_norm;
  fit.evidence = w.evidence;
  return fit;
}

InputDepGPFit fit_inputdep_gp(const TrainingSet& training, const HyperPriorSpec& priors,
                              std::uint64_t seed, const InputDepFitOptions& opts) {
  training.validate();
  if (training.t() < 2) {
    throw ContractError("fit_inputdep_gp: at least two training points required");
  }
  priors.validate(training.p());
  if (!priors.flat && priors.kind != SurrogateKind::kInputDependent) {
    throw ContractError("fit_inputdep_gp: prior spec is for another surrogate kind");
  }
  const int p = training.p();
  const double sigma2 =
      std::max(trimmed_variance(training.discrepancies_std()), 1e-12);
  const double m0 = inputdep_prior_mean(training);

  const auto unpack = [&](const Eigen::VectorXd& x) {
    InputDepHyperparams h;
    h.signal_variance = std::exp(x(0));
    h.lengthscales_f.resize(p);
    for (int j = 0; j < p; ++j) h.lengthscales_f(j) = std::exp(x(1 + j));
    h.noise_signal_variance = std::exp(x(1 + p));
    h.lengthscales_g.resize(p);
    for (int j = 0; j < p; ++j) h.lengthscales_g(j) = std::exp(x(2 + p + j));
    h.fixed_noise = sigma2;
    return h;
  };

  // Warm-start the Newton mode search from the previous evaluation; the
  // returned fit is rebuilt cold at the winning hyperparameters so the result
  // does not depend on the optimizer's evaluation path.
  Eigen::VectorXd warm_f, warm_g;
  Objective objective = [&](const Eigen::VectorXd& x) {
    const InputDepHyperparams h = unpack(x);
    const LaplaceWork w =
        run_laplace(training, h, m0, warm_f.size() ? &warm_f : nullptr,
                    warm_g.size() ? &warm_g : nullptr, opts.newton_max_iterations,
                    opts.newton_grad_tolerance);
    warm_f = w.mode.f;
    warm_g = w.mode.g;
    return -(w.evidence + inputdep_log_hyperprior(h, priors));
  };

  bool have_best = false;
  OptimResult best;
  int best_index = -1;
  std::string failures;
  NelderMeadOptions nm;
  nm.max_iterations = opts.nm_max_iterations;
  nm.size_tolerance = opts.nm_tolerance;

  const std::vector<double> deltas = training.discrepancies_std();
  const double sd = std::max(trimmed_sd(deltas), 1e-6);

  for (int k = 0; k < opts.restarts; ++k) {
    warm_f.resize(0);
    warm_g.resize(0);
    RngStream rng(derive_seed(seed, static_cast<std::uint64_t>(k)));
    Eigen::VectorXd x0(2 * p + 2);
    if (priors.flat) {
      x0(0) = 2.0 * std::log(sd) + rng.normal(0.0, 0.5);
      for (int j = 0; j < p; ++j) x0(1 + j) = rng.normal(0.0, 0.5);
      x0(1 + p) = rng.normal(0.0, 0.5);
      for (int j = 0; j < p; ++j) x0(2 + p + j) = rng.normal(0.0, 0.5);
    } else {
      x0(0) = 2.0 * std::log(priors.signal_sd->sample_clamped(rng));
      for (int j = 0; j < p; ++j) {
        x0(1 + j) =
            std::log(priors.lengthscale[static_cast<std::size_t>(j)].sample_clamped(rng));
      }
      x0(1 + p) = 2.0 * std::log(priors.noise_signal_sd->sample_clamped(rng));
      for (int j = 0; j < p; ++j) {
        x0(2 + p + j) = std::log(
            priors.noise_lengthscale[static_cast<std::size_t>(j)].sample_clamped(rng));
      }
    }
    OptimResult res = minimize_nelder_mead(
        objective, x0, Eigen::VectorXd::Constant(2 * p + 2, 0.5), nm);
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
    throw FitError("fit_inputdep_gp: all restarts failed (" + failures + ")");
  }

  InputDepGPFit fit =
      laplace_inputdep_fit(training, unpack(best.x), m0, opts.newton_max_iterations,
                           opts.newton_grad_tolerance);
  fit.objective = -best.value;
  fit.winning_restart = best_index;
  return fit;
}

InputDepPrediction predict_inputdep(const InputDepGPFit& fit, const Eigen::VectorXd& q) {
  if (q.size() != fit.training.params.cols()) {
    throw ContractError("predict_inputdep: query dimension mismatch");
  }
  const Eigen::Index t = fit.training.params.rows();
  const Eigen::VectorXd kf = se_cross(fit.training.params, q, fit.hyperparams.f_kernel());
  const Eigen::VectorXd kg = se_cross(fit.training.params, q, fit.hyperparams.g_kernel());

  InputDepPrediction out;
  out.mean = fit.prior_mean_const + kf.dot(fit.alpha_f);
  const double mu_g = kg.dot(fit.alpha_g);

  const Eigen::VectorXd uf = fit.chol_kf.half_solve(kf);
  const Eigen::VectorXd ug = fit.chol_kg.half_solve(kg);

  Eigen::VectorXd zf = Eigen::VectorXd::Zero(2 * t);
  zf.head(t) = uf;
  Eigen::VectorXd zg = Eigen::VectorXd::Zero(2 * t);
  zg.tail(t) = ug;

  const double vf = fit.hyperparams.signal_variance - uf.squaredNorm() +
                    fit.chol_h.half_solve(zf).squaredNorm();
  const double vg = fit.hyperparams.noise_signal_variance - ug.squaredNorm() +
                    fit.chol_h.half_solve(zg).squaredNorm();

  out.latent_variance = std::max(0.0, vf);
  out.noise_variance =
      fit.hyperparams.fixed_noise * std::exp(mu_g + 0.5 * std::max(0.0, vg));
  return out;
}

double tail_probability_inputdep(const InputDepGPFit& fit, const Eigen::VectorXd& q,
                                 double eps) {
  const InputDepPrediction pred = predict_inputdep(fit, q);
  const double s2 = std::max(pred.latent_variance + pred.noise_variance, 1e-300);
  return norm_cdf((eps - pred.mean) / std::sqrt(s2));
}

std::pair<double, double> log_tail_probability_pair_inputdep(const InputDepGPFit& fit,
                                                             const Eigen::VectorXd& q,
                                                             double eps) {
  const InputDepPrediction pred = predict_inputdep(fit, q);
  const double s2 = std::max(pred.latent_variance + pred.noise_variance, 1e-300);
  const double z = (eps - pred.mean) / std::sqrt(s2);
  return {log_norm_cdf(z), log_norm_cdf(-z)};
}

double log_predictive_density_inputdep(const InputDepGPFit& fit,
                                       const Eigen::VectorXd& q, double delta) {
  const InputDepPrediction pred = predict_inputdep(fit, q);
  const double s2 = std::max(pred.latent_variance + pred.noise_variance, 1e-300);
  const double d = delta - pred.mean;
  return -0.5 * (kLog2Pi + std::log(s2)) - 0.5 * d * d / s2;
}

}  // namespace gpabc
