#include "gpabc/kernel.hpp"

#include <algorithm>
#include <cmath>

#include "gpabc/errors.hpp"
#include "gpabc/mathutil.hpp"

namespace gpabc {

void SEHyperparams::validate() const {
  if (!(signal_variance > 0.0) || !std::isfinite(signal_variance)) {
    throw ContractError("SEHyperparams: signal_variance must be positive");
  }
  if (lengthscales.size() == 0) {
    throw ContractError("SEHyperparams: lengthscale vector is empty");
  }
  for (Eigen::Index i = 0; i < lengthscales.size(); ++i) {
    if (!(lengthscales(i) > 0.0) || !std::isfinite(lengthscales(i))) {
      throw ContractError("SEHyperparams: lengthscales must be positive");
    }
  }
  if (noise_variance < 0.0 || !std::isfinite(noise_variance)) {
    throw ContractError("SEHyperparams: noise_variance must be nonnegative");
  }
}

double StudentTPrior::logpdf(double x) const {
  return student_t_logpdf(x, location, scale, dof);
}

double StudentTPrior::logpdf_dx(double x) const {
  return student_t_logpdf_dx(x, location, scale, dof);
}

double StudentTPrior::sample_clamped(RngStream& rng) const {
  double x = location + scale * rng.student_t(dof);
  x = std::clamp(x, location - 3.0 * scale, location + 3.0 * scale);
  const double floor = 1e-3 * scale;
  return std::max(std::fabs(x), floor);
}

std::string to_string(SurrogateKind kind) {
  switch (kind) {
    case SurrogateKind::kStandard: return "gp";
    case SurrogateKind::kInputDependent: return "gp-indep";
    case SurrogateKind::kClassifier: return "classifier";
  }
  return "?";
}

HyperPriorSpec HyperPriorSpec::improper(SurrogateKind kind, int p) {
  HyperPriorSpec spec;
  spec.kind = kind;
  spec.flat = true;
  spec.lengthscale.assign(static_cast<std::size_t>(p), StudentTPrior{});
  if (kind == SurrogateKind::kInputDependent) {
    spec.noise_lengthscale.assign(static_cast<std::size_t>(p), StudentTPrior{});
    spec.noise_signal_sd = StudentTPrior{};
  }
  spec.signal_sd = StudentTPrior{};
  return spec;
}

void HyperPriorSpec::validate(int p) const {
  if (flat) return;
  if (static_cast<int>(lengthscale.size()) != p) {
    throw ContractError("HyperPriorSpec: lengthscale prior count != parameter dimension");
  }
  if (!signal_sd.has_value()) {
    throw ContractError("HyperPriorSpec: missing signal prior");
  }
  if (kind == SurrogateKind::kInputDependent) {
    if (static_cast<int>(noise_lengthscale.size()) != p || !noise_signal_sd.has_value()) {
      throw ContractError("HyperPriorSpec: missing noise-process priors");
    }
  }
  for (const auto& pr : lengthscale) {
    if (!(pr.scale > 0.0) || !(pr.dof > 0.0)) {
      throw ContractError("StudentTPrior: scale and dof must be positive");
    }
  }
}

double se_covariance(const Eigen::VectorXd& a, const Eigen::VectorXd& b,
                     const SEHyperparams& h) {
  if (a.size() != b.size() || a.size() != h.lengthscales.size()) {
    throw ContractError("se_covariance: dimension mismatch");
  }
  double q = 0.0;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    const double d = (a(i) - b(i)) / h.lengthscales(i);
    q += d * d;
  }
  return h.signal_variance * std::exp(-0.5 * q);
}

Eigen::MatrixXd se_gram(const Eigen::MatrixXd& points, const SEHyperparams& h) {
  const Eigen::Index t = points.rows();
  if (t == 0) throw ContractError("se_gram: empty point set");
  if (points.cols() != h.lengthscales.size()) {
    throw ContractError("se_gram: dimension mismatch");
  }
  // Scale each coordinate by its lengthscale, then use the squared-distance
  // expansion to keep this a matrix product.
  Eigen::MatrixXd scaled = points;
  for (Eigen::Index j = 0; j < points.cols(); ++j) {
    scaled.col(j) /= h.lengthscales(j);
  }
  Eigen::VectorXd sq = scaled.rowwise().squaredNorm();
  Eigen::MatrixXd K = scaled * scaled.transpose();
  K *= -2.0;
  K.colwise() += sq;
  K.rowwise() += sq.transpose();
  K = (-0.5 * K.array()).min(0.0).exp().matrix() * h.signal_variance;
  return K;
}

Eigen::VectorXd se_cross(const Eigen::MatrixXd& points, const Eigen::VectorXd& q,
                         const SEHyperparams& h) {
  if (points.cols() != q.size() || q.size() != h.lengthscales.size()) {
    throw ContractError("se_cross: dimension mismatch");
  }
  Eigen::VectorXd out(points.rows());
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    double acc = 0.0;
    for (Eigen::Index j = 0; j < q.size(); ++j) {
      const double d = (points(i, j) - q(j)) / h.lengthscales(j);
      acc += d * d;
    }
    out(i) = h.signal_variance * std::exp(-0.5 * acc);
  }
  return out;
}

Eigen::MatrixXd covariance_matrix(const Eigen::MatrixXd& points,
                                  const SEHyperparams& h, double jitter) {
  if (jitter < 0.0) throw ContractError("covariance_matrix: jitter must be nonnegative");
  Eigen::MatrixXd K = se_gram(points, h);
  K.diagonal().array() += h.noise_variance + jitter;
  return K;
}

HyperPriorSpec default_hyperpriors(SurrogateKind kind, const PriorBox& box,
                                   const std::vector<double>& discrepancies) {
  if (discrepancies.empty()) {
    throw ContractError("default_hyperpriors: empty discrepancy vector");
  }
  const int p = box.dim();
  HyperPriorSpec spec;
  spec.kind = kind;
  const double sd = trimmed_sd(discrepancies);
  switch (kind) {
    case SurrogateKind::kStandard:
      for (int j = 0; j < p; ++j) {
        spec.lengthscale.push_back({0.0, box.range(j) / 2.0, 4.0});
      }
      spec.signal_sd = StudentTPrior{0.0, sd, 4.0};
      // sigma^2 keeps an improper uniform prior on the positive axis.
      break;
    case SurrogateKind::kInputDependent:
      for (int j = 0; j < p; ++j) {
        spec.lengthscale.push_back({box.range(j) / 3.0, box.range(j) / 3.0, 10.0});
        spec.noise_lengthscale.push_back({box.range(j) / 2.0, box.range(j) / 9.0, 10.0});
      }
      spec.signal_sd = StudentTPrior{0.0, sd, 10.0};
      spec.noise_signal_sd = StudentTPrior{0.0, 1.0, 10.0};
      break;
    case SurrogateKind::kClassifier:
      for (int j = 0; j < p; ++j) {
        spec.lengthscale.push_back({0.0, box.range(j) / 5.0, 4.0});
      }
      spec.signal_sd = StudentTPrior{0.0, 20.0, 4.0};
      break;
  }
  // Degenerate samples (all discrepancies equal) would zero the signal prior
  // scale; keep it proper.
  if (spec.signal_sd && !(spec.signal_sd->scale > 0.0)) {
    spec.signal_sd->scale = 1e-8;
  }
  return spec;
}

}  // namespace gpabc
