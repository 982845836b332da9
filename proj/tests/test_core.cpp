#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "gpabc/errors.hpp"
#include "gpabc/kernel.hpp"
#include "gpabc/mathutil.hpp"
#include "gpabc/optim.hpp"
#include "gpabc/rng.hpp"
#include "gpabc/surrogate_standard.hpp"
#include "gpabc/training.hpp"
#include "gpabc/transforms.hpp"

using namespace gpabc;

namespace {

Eigen::MatrixXd random_points(RngStream& rng, int t, int p, double lo, double hi) {
  Eigen::MatrixXd X(t, p);
  for (int i = 0; i < t; ++i) {
    for (int j = 0; j < p; ++j) X(i, j) = rng.uniform(lo, hi);
  }
  return X;
}

SEHyperparams make_hyper(double sf2, std::vector<double> ls, double s2) {
  SEHyperparams h;
  h.signal_variance = sf2;
  h.lengthscales = Eigen::Map<Eigen::VectorXd>(ls.data(), static_cast<long>(ls.size()));
  h.noise_variance = s2;
  return h;
}

}  // namespace

TEST_CASE("se covariance closed forms") {
  Eigen::VectorXd a(2), b(2);
  a << 1.0, 2.0;
  b << 1.0, 2.0;
  auto h = make_hyper(2.0, {1.0, 1.0}, 0.0);
  CHECK(se_covariance(a, b, h) == doctest::Approx(2.0));

  Eigen::VectorXd c(1), d(1);
  c << 0.0;
  d << 0.7;
  auto h1 = make_hyper(1.0, {0.7}, 0.0);
  CHECK(se_covariance(c, d, h1) == doctest::Approx(std::exp(-0.5)).epsilon(1e-12));

  Eigen::VectorXd e(1);
  e << 0.0;
  CHECK_THROWS_AS(se_covariance(a, e, h), ContractError);
}

TEST_CASE("se covariance symmetry, diagonal and monotone decay") {
  RngStream rng(11);
  auto h = make_hyper(1.7, {0.6, 1.3, 0.9}, 0.0);
  for (int k = 0; k < 200; ++k) {
    Eigen::VectorXd a(3), b(3);
    for (int j = 0; j < 3; ++j) {
      a(j) = rng.uniform(-2, 2);
      b(j) = rng.uniform(-2, 2);
    }
    CHECK(se_covariance(a, b, h) == se_covariance(b, a, h));
    CHECK(se_covariance(a, a, h) == doctest::Approx(1.7).epsilon(1e-15));
  }
  // Strictly decreasing in each coordinate distance.
  Eigen::VectorXd base = Eigen::VectorXd::Zero(3);
  for (int j = 0; j < 3; ++j) {
    double prev = se_covariance(base, base, h);
    for (double step : {0.1, 0.5, 1.0, 2.0}) {
      Eigen::VectorXd q = base;
      q(j) += step;
      const double v = se_covariance(base, q, h);
      CHECK(v < prev);
      prev = v;
    }
  }
}

TEST_CASE("gram matrix equals double-loop evaluation") {
  RngStream rng(42);
  Eigen::MatrixXd X = random_points(rng, 5, 2, -1.0, 3.0);
  auto h = make_hyper(0.8, {0.5, 2.0}, 0.0);
  Eigen::MatrixXd K = se_gram(X, h);
  for (int i = 0; i < 5; ++i) {
    for (int j = 0; j < 5; ++j) {
      CHECK(K(i, j) ==
            doctest::Approx(se_covariance(X.row(i), X.row(j), h)).epsilon(1e-12));
    }
  }
}

TEST_CASE("covariance matrix diagonal and conditioning") {
  Eigen::MatrixXd one(1, 1);
  one << 0.3;
  auto h = make_hyper(1.0, {1.0}, 0.1);
  Eigen::MatrixXd K = covariance_matrix(one, h, 0.0);
  CHECK(K(0, 0) == doctest::Approx(1.1));

  // Two identical points with zero noise: singular without jitter.
  Eigen::MatrixXd two(2, 1);
  two << 0.5, 0.5;
  auto h0 = make_hyper(1.0, {1.0}, 0.0);
  Eigen::MatrixXd K2 = covariance_matrix(two, h0, 0.0);
  Eigen::LLT<Eigen::MatrixXd> direct(K2);
  CHECK(direct.info() != Eigen::Success);
  Eigen::MatrixXd K2j = covariance_matrix(two, h0, 1e-8);
  Eigen::LLT<Eigen::MatrixXd> with_jitter(K2j);
  CHECK(with_jitter.info() == Eigen::Success);

  // Random set: eigenvalues positive after escalated jitter.
  RngStream rng(7);
  Eigen::MatrixXd X = random_points(rng, 10, 1, 0.0, 5.0);
  auto hsmall = make_hyper(2.0, {4.0}, 0.0);
  Eigen::MatrixXd K10 = covariance_matrix(X, hsmall, 0.0);
  CholeskyResult chol = cholesky_with_jitter(K10);
  Eigen::MatrixXd Kj = K10;
  Kj.diagonal().array() += chol.jitter;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Kj);
  CHECK(es.eigenvalues().minCoeff() > 0.0);
}

TEST_CASE("student-t prior log density matches direct formula") {
  RngStream rng(3);
  for (int k = 0; k < 100; ++k) {
    const double loc = rng.uniform(-2, 2);
    const double scale = rng.uniform(0.1, 4.0);
    const double dof = rng.uniform(1.0, 30.0);
    const double x = rng.uniform(-10, 10);
    StudentTPrior prior{loc, scale, dof};
    const double z = (x - loc) / scale;
    const double direct =
        std::lgamma((dof + 1) / 2.0) - std::lgamma(dof / 2.0) -
        0.5 * std::log(dof * M_PI) - std::log(scale) -
        (dof + 1) / 2.0 * std::log(1.0 + z * z / dof);
    CHECK(prior.logpdf(x) == doctest::Approx(direct).epsilon(1e-12));
    // Derivative vs central difference.
    const double eps = 1e-6;
    const double fd = (prior.logpdf(x + eps) - prior.logpdf(x - eps)) / (2 * eps);
    CHECK(prior.logpdf_dx(x) == doctest::Approx(fd).epsilon(1e-5));
  }
}

TEST_CASE("default hyperprior recipes") {
  std::vector<double> deltas(50);
  RngStream rng(5);
  for (auto& d : deltas) d = rng.uniform(0.0, 2.0);

  auto std1 = default_hyperpriors(SurrogateKind::kStandard, PriorBox::interval(0, 5), deltas);
  REQUIRE(std1.lengthscale.size() == 1);
  CHECK(std1.lengthscale[0].location == 0.0);
  CHECK(std1.lengthscale[0].scale == doctest::Approx(2.5));
  CHECK(std1.lengthscale[0].dof == 4.0);
  CHECK(std1.signal_sd->scale == doctest::Approx(trimmed_sd(deltas)));
  CHECK(std1.signal_sd->dof == 4.0);

  auto cls = default_hyperpriors(SurrogateKind::kClassifier, PriorBox::interval(0, 5), deltas);
  CHECK(cls.lengthscale[0].scale == doctest::Approx(1.0));
  CHECK(cls.signal_sd->scale == doctest::Approx(20.0));

  auto dep = default_hyperpriors(SurrogateKind::kInputDependent, PriorBox::interval(0, 3), deltas);
  CHECK(dep.lengthscale[0].location == doctest::Approx(1.0));
  CHECK(dep.lengthscale[0].scale == doctest::Approx(1.0));
  CHECK(dep.lengthscale[0].dof == 10.0);
  CHECK(dep.noise_lengthscale[0].location == doctest::Approx(1.5));
  CHECK(dep.noise_lengthscale[0].scale == doctest::Approx(3.0 / 9.0));
  CHECK(dep.noise_signal_sd->scale == doctest::Approx(1.0));

  CHECK_THROWS_AS(default_hyperpriors(SurrogateKind::kStandard, PriorBox::interval(0, 1), {}),
                  ContractError);
}

TEST_CASE("transforms: values, thresholds, jacobians, round trips") {
  CHECK(apply_transform(Transform::kSqrt, 4.0) == doctest::Approx(2.0));
  CHECK(apply_transform(Transform::kLog, 1.0) == doctest::Approx(0.0));
  CHECK(apply_transform(Transform::kSe, 3.7) == doctest::Approx(3.7));
  CHECK(transform_threshold(Transform::kSqrt, 0.09) == doctest::Approx(0.3));
  CHECK(transform_threshold(Transform::kLog, std::exp(2.0)) == doctest::Approx(2.0));
  CHECK(transform_log_jacobian(Transform::kSe, 123.0) == 0.0);
  CHECK(transform_log_jacobian(Transform::kLog, 1.0) == doctest::Approx(0.0));
  CHECK(transform_log_jacobian(Transform::kSqrt, 0.25) == doctest::Approx(0.0));

  CHECK_THROWS_AS(apply_transform(Transform::kLog, 0.0), DomainError);
  CHECK_THROWS_AS(apply_transform(Transform::kLog, -1.0), DomainError);
  CHECK_THROWS_AS(apply_transform(Transform::kSqrt, -0.5), DomainError);

  RngStream rng(19);
  for (auto t : {Transform::kSe, Transform::kLog, Transform::kSqrt}) {
    double prev_x = 1e-6, prev_y = apply_transform(t, 1e-6);
    for (int k = 0; k < 300; ++k) {
      const double x = prev_x + rng.uniform(1e-4, 0.5);
      const double y = apply_transform(t, x);
      CHECK(y > prev_y);  // strict monotonicity on sorted inputs
      CHECK(invert_transform(t, y) == doctest::Approx(x).epsilon(1e-12));
      prev_x = x;
      prev_y = y;
    }
  }
}

TEST_CASE("indicator preservation under threshold transport") {
  RngStream rng(23);
  for (auto t : {Transform::kSe, Transform::kLog, Transform::kSqrt}) {
    for (int k = 0; k < 10000; ++k) {
      const double delta = rng.uniform(1e-9, 10.0);
      const double eps = rng.uniform(1e-9, 10.0);
      const bool raw = delta <= eps;
      const bool transported =
          apply_transform(t, delta) <= transform_threshold(t, eps);
      CHECK(raw == transported);
    }
  }
}

TEST_CASE("normal cdf helpers") {
  CHECK(norm_cdf(0.0) == doctest::Approx(0.5));
  CHECK(norm_cdf(-2.0) == doctest::Approx(0.022750131948).epsilon(1e-9));
  for (double x : {-30.0, -8.0, -2.0, -0.5, 0.0, 1.0, 5.0}) {
    if (x > -8.0) {
      CHECK(log_norm_cdf(x) == doctest::Approx(std::log(norm_cdf(x))).epsilon(1e-10));
    }
    CHECK(norm_cdf_inv(std::exp(log_norm_cdf(x))) == doctest::Approx(x).epsilon(1e-6));
  }
  // Far tail: compare against the complementary identity.
  CHECK(std::exp(log_norm_cdf(-30.0)) == doctest::Approx(norm_cdf(-30.0)).epsilon(1e-10));
  // Gauss-Hermite behaves like a probability.
  CHECK(gauss_hermite_logistic_mean(0.0, 1.0) == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(gauss_hermite_logistic_mean(3.0, 0.5) > 0.9);
}

TEST_CASE("trimmed statistics drop 5 percent from each tail") {
  std::vector<double> v(100);
  for (int i = 0; i < 100; ++i) v[static_cast<std::size_t>(i)] = i + 1.0;
  const auto tv = trimmed_values(v);
  CHECK(tv.size() == 90);
  CHECK(tv.front() == 6.0);
  CHECK(tv.back() == 95.0);
  CHECK(trimmed_mean(v) == doctest::Approx(50.5));
}

TEST_CASE("optimizers find quadratic minima deterministically") {
  GradObjective quad = [](const Eigen::VectorXd& x, Eigen::VectorXd* g) {
    const double v = 0.5 * (x(0) - 1) * (x(0) - 1) + 2.0 * (x(1) + 2) * (x(1) + 2);
    if (g) {
      g->resize(2);
      (*g)(0) = x(0) - 1;
      (*g)(1) = 4.0 * (x(1) + 2);
    }
    return v;
  };
  Eigen::VectorXd x0(2);
  x0 << 5.0, 5.0;
  auto r1 = minimize_bfgs(quad, x0);
  auto r2 = minimize_bfgs(quad, x0);
  CHECK(r1.converged);
  CHECK(r1.x(0) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(r1.x(1) == doctest::Approx(-2.0).epsilon(1e-6));
  CHECK(r1.x == r2.x);

  Objective f = [](const Eigen::VectorXd& x) {
    return (x(0) - 3) * (x(0) - 3) + 0.5 * (x(1) - 1) * (x(1) - 1);
  };
  Eigen::VectorXd step = Eigen::VectorXd::Constant(2, 0.5);
  auto n1 = minimize_nelder_mead(f, x0, step);
  auto n2 = minimize_nelder_mead(f, x0, step);
  CHECK(n1.converged);
  CHECK(n1.x(0) == doctest::Approx(3.0).epsilon(1e-2));
  CHECK(n1.x == n2.x);
}

TEST_CASE("marginal log likelihood gradient matches finite differences") {
  RngStream rng(101);
  for (int rep = 0; rep < 4; ++rep) {
    const int t = 12, p = rep % 2 + 1;
    TrainingSet ts;
    ts.params = random_points(rng, t, p, 0.0, 5.0);
    ts.discrepancies.resize(t);
    for (int i = 0; i < t; ++i) ts.discrepancies(i) = rng.uniform(0.1, 3.0);
    ts.transform_tag = Transform::kSe;

    const auto priors_real =
        default_hyperpriors(SurrogateKind::kStandard,
                            p == 1 ? PriorBox::interval(0, 5)
                                   : PriorBox::rectangle(0, 5, 0, 5),
                            ts.discrepancies_std());
    const auto priors_flat = HyperPriorSpec::improper(SurrogateKind::kStandard, p);

    for (const auto* priors : {&priors_real, &priors_flat}) {
      Eigen::VectorXd eta(p + 2);
      eta(0) = std::log(rng.uniform(0.5, 2.0));
      for (int j = 0; j < p; ++j) eta(1 + j) = std::log(rng.uniform(0.5, 3.0));
      eta(p + 1) = std::log(rng.uniform(0.05, 0.5));

      auto unpack = [&](const Eigen::VectorXd& e) {
        SEHyperparams h;
        h.signal_variance = std::exp(e(0));
        h.lengthscales.resize(p);
        for (int j = 0; j < p; ++j) h.lengthscales(j) = std::exp(e(1 + j));
        h.noise_variance = std::exp(e(p + 1));
        return h;
      };

      const auto [value, grad] = marginal_loglik_and_gradient(ts, unpack(eta), *priors);
      CHECK(std::isfinite(value));
      const double step = 1e-5;
      for (int k = 0; k < p + 2; ++k) {
        Eigen::VectorXd ep = eta, em = eta;
        ep(k) += step;
        em(k) -= step;
        const double fp = marginal_loglik_and_gradient(ts, unpack(ep), *priors).first;
        const double fm = marginal_loglik_and_gradient(ts, unpack(em), *priors).first;
        const double fd = (fp - fm) / (2 * step);
        CHECK(grad(k) == doctest::Approx(fd).epsilon(1e-4));
      }
    }
  }
}

TEST_CASE("marginal log likelihood scaling identity") {
  RngStream rng(55);
  const int t = 20;
  TrainingSet ts;
  ts.params = random_points(rng, t, 1, 0.0, 5.0);
  ts.discrepancies.resize(t);
  for (int i = 0; i < t; ++i) ts.discrepancies(i) = rng.uniform(0.2, 2.0);

  const auto flat = HyperPriorSpec::improper(SurrogateKind::kStandard, 1);
  auto h = make_hyper(1.3, {1.1}, 0.2);
  const double v1 = marginal_loglik_and_gradient(ts, h, flat).first;

  const double c = 3.7;
  TrainingSet ts2 = ts;
  ts2.discrepancies *= c;
  auto h2 = make_hyper(1.3 * c * c, {1.1}, 0.2 * c * c);
  const double v2 = marginal_loglik_and_gradient(ts2, h2, flat).first;
  CHECK(v2 == doctest::Approx(v1 - t * std::log(c)).epsilon(1e-10));
}

TEST_CASE("single-point closed forms") {
  TrainingSet ts;
  ts.params.resize(1, 1);
  ts.params << 2.0;
  ts.discrepancies.resize(1);
  ts.discrepancies << 1.4;

  auto h = make_hyper(0.9, {1.0}, 0.3);
  auto fit = condition_standard_gp(ts, h, 0.0);
  Eigen::VectorXd q(1);
  q << 2.0;
  const auto pred = predict(fit, q);
  CHECK(pred.mean == doctest::Approx(0.9 * 1.4 / (0.9 + 0.3)).epsilon(1e-12));

  // Marginal likelihood at t=1 equals a single Gaussian log density.
  const auto flat = HyperPriorSpec::improper(SurrogateKind::kStandard, 1);
  const double value = marginal_loglik_and_gradient(ts, h, flat).first;
  const double s2 = 0.9 + 0.3;
  const double direct = -0.5 * std::log(2 * M_PI * s2) - 1.4 * 1.4 / (2 * s2);
  CHECK(value == doctest::Approx(direct).epsilon(1e-12));
}

TEST_CASE("predict matches dense solve and decays to the prior") {
  RngStream rng(77);
  TrainingSet ts;
  ts.params.resize(3, 1);
  ts.params << 0.5, 1.5, 2.5;
  ts.discrepancies.resize(3);
  ts.discrepancies << 1.0, 0.4, 0.9;
  auto h = make_hyper(1.2, {0.8}, 0.05);
  auto fit = condition_standard_gp(ts, h, 0.0);

  Eigen::MatrixXd K = covariance_matrix(ts.params, h, 0.0);
  Eigen::VectorXd q(1);
  q << 1.1;
  Eigen::VectorXd k(3);
  for (int i = 0; i < 3; ++i) k(i) = se_covariance(ts.params.row(i), q, h);
  const Eigen::VectorXd alpha = K.ldlt().solve(ts.discrepancies);
  const auto pred = predict(fit, q);
  CHECK(pred.mean == doctest::Approx(k.dot(alpha)).epsilon(1e-10));
  const double vdirect = 1.2 - k.dot(K.ldlt().solve(k));
  CHECK(pred.latent_variance == doctest::Approx(vdirect).epsilon(1e-10));

  // Far field: prior mean and full signal variance.
  Eigen::VectorXd far(1);
  far << 1e4;
  const auto fp = predict(fit, far);
  CHECK(std::fabs(fp.mean) < 1e-6);
  CHECK(fp.latent_variance == doctest::Approx(1.2).epsilon(1e-6));
}

TEST_CASE("tail probability closed forms and log pair") {
  TrainingSet ts;
  ts.params.resize(2, 1);
  ts.params << 0.0, 1.0;
  ts.discrepancies.resize(2);
  ts.discrepancies << 0.5, 0.7;
  auto h = make_hyper(0.4, {1.0}, 0.1);
  auto fit = condition_standard_gp(ts, h, 0.0);
  Eigen::VectorXd q(1);
  q << 0.4;
  const auto pred = predict(fit, q);
  const double s = std::sqrt(pred.latent_variance + 0.1);
  CHECK(tail_probability(fit, q, pred.mean) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(tail_probability(fit, q, pred.mean + 2 * s) ==
        doctest::Approx(norm_cdf(2.0)).epsilon(1e-12));
  CHECK(tail_probability(fit, q, pred.mean - 2 * s) ==
        doctest::Approx(0.0227501319).epsilon(1e-6));

  // Monotone in eps; log pair consistent.
  double prev = 0.0;
  for (double eps = -3.0; eps <= 3.0; eps += 0.1) {
    const double tp = tail_probability(fit, q, eps);
    CHECK(tp >= prev);
    prev = tp;
    const auto [lp, lq] = log_tail_probability_pair(fit, q, eps);
    CHECK(std::exp(lp) == doctest::Approx(tp).epsilon(1e-9));
    CHECK(std::exp(lq) == doctest::Approx(1.0 - tp).epsilon(1e-9));
  }
}

TEST_CASE("log predictive density formula oracle") {
  TrainingSet ts;
  ts.params.resize(2, 1);
  ts.params << 0.0, 2.0;
  ts.discrepancies.resize(2);
  ts.discrepancies << 0.3, 0.8;
  auto h = make_hyper(0.1, {1.0}, 1.0 / (2 * M_PI) - 0.1);
  auto fit = condition_standard_gp(ts, h, 0.0);

  // Far from data the total predictive variance is sigma_f^2 + sigma^2 =
  // 1/(2 pi), so the density at the mean is exactly 1.
  Eigen::VectorXd far(1);
  far << 1e5;
  CHECK(log_predictive_density(fit, far, 0.0) == doctest::Approx(0.0).epsilon(1e-9));

  Eigen::VectorXd q(1);
  q << 1.0;
  const auto pred = predict(fit, q);
  const double s2 = pred.latent_variance + h.noise_variance;
  for (double k : {0.5, 1.0, 2.0}) {
    const double up = log_predictive_density(fit, q, pred.mean + k * std::sqrt(s2));
    const double dn = log_predictive_density(fit, q, pred.mean - k * std::sqrt(s2));
    CHECK(up == doctest::Approx(dn).epsilon(1e-12));
    const double direct = -0.5 * std::log(2 * M_PI * s2) - 0.5 * k * k;
    CHECK(up == doctest::Approx(direct).epsilon(1e-10));
  }
}

TEST_CASE("tail probability agrees with monte carlo draws") {
  RngStream rng(909);
  TrainingSet ts;
  ts.params = random_points(rng, 25, 1, 0.0, 5.0);
  ts.discrepancies.resize(25);
  for (int i = 0; i < 25; ++i) {
    ts.discrepancies(i) = 0.5 + 0.3 * ts.params(i, 0) + rng.normal(0.0, 0.2);
  }
  auto h = make_hyper(0.8, {1.2}, 0.04);
  auto fit = condition_standard_gp(ts, h, 0.0);
  Eigen::VectorXd q(1);
  q << 2.7;
  const auto pred = predict(fit, q);
  const double sd = std::sqrt(pred.latent_variance + h.noise_variance);
  for (double eps : {pred.mean - sd, pred.mean + 0.3 * sd, pred.mean + 1.7 * sd}) {
    const int n = 100000;
    int hits = 0;
    RngStream mc(1234);
    for (int i = 0; i < n; ++i) {
      if (mc.normal(pred.mean, sd) <= eps) ++hits;
    }
    const double freq = static_cast<double>(hits) / n;
    const double p = tail_probability(fit, q, eps);
    const double se = std::sqrt(p * (1 - p) / n);
    CHECK(std::fabs(freq - p) < 3 * se + 1e-12);
  }
}
