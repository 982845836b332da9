#pragma once

#include <Eigen/Dense>

namespace gpabc {

/// Axis-aligned uniform prior over the parameters. Density is 1/volume
/// inside the box and 0 outside.
struct PriorBox {
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;

  PriorBox() = default;
  PriorBox(Eigen::VectorXd lo, Eigen::VectorXd hi);
  static PriorBox interval(double lo, double hi);
  static PriorBox rectangle(double lo1, double hi1, double lo2, double hi2);

  int dim() const { return static_cast<int>(lower.size()); }
  double range(int i) const { return upper(i) - lower(i); }
  double volume() const;
  bool contains(const Eigen::VectorXd& theta) const;
  Eigen::VectorXd clamp(const Eigen::VectorXd& theta) const;
};

}  // namespace gpabc
