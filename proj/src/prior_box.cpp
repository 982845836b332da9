#include "gpabc/prior_box.hpp"

#include "gpabc/errors.hpp"

namespace gpabc {

PriorBox::PriorBox(Eigen::VectorXd lo, Eigen::VectorXd hi)
    : lower(std::move(lo)), upper(std::move(hi)) {
  if (lower.size() == 0 || lower.size() != upper.size()) {
    throw ContractError("PriorBox: bounds must be nonempty and of equal dimension");
  }
  for (Eigen::Index i = 0; i < lower.size(); ++i) {
    if (!(lower(i) < upper(i)) || !std::isfinite(lower(i)) || !std::isfinite(upper(i))) {
      throw ContractError("PriorBox: requires finite lower < upper componentwise");
    }
  }
}

PriorBox PriorBox::interval(double lo, double hi) {
  Eigen::VectorXd l(1), u(1);
  l << lo;
  u << hi;
  return PriorBox(l, u);
}

PriorBox PriorBox::rectangle(double lo1, double hi1, double lo2, double hi2) {
  Eigen::VectorXd l(2), u(2);
  l << lo1, lo2;
  u << hi1, hi2;
  return PriorBox(l, u);
}

double PriorBox::volume() const {
  double v = 1.0;
  for (Eigen::Index i = 0; i < lower.size(); ++i) v *= upper(i) - lower(i);
  return v;
}

bool PriorBox::contains(const Eigen::VectorXd& theta) const {
  if (theta.size() != lower.size()) return false;
  for (Eigen::Index i = 0; i < lower.size(); ++i) {
    if (theta(i) < lower(i) || theta(i) > upper(i)) return false;
  }
  return true;
}

Eigen::VectorXd PriorBox::clamp(const Eigen::VectorXd& theta) const {
  Eigen::VectorXd out = theta;
  for (Eigen::Index i = 0; i < lower.size(); ++i) {
    out(i) = std::min(std::max(out(i), lower(i)), upper(i));
  }
  return out;
}

}  // namespace gpabc
