#pragma once

#include <Eigen/Dense>
#include <vector>

#include "gpabc/transforms.hpp"

namespace gpabc {

/// Ordered discrepancy-parameter pairs, with discrepancies already expressed
/// under transform_tag.
struct TrainingSet {
  Eigen::MatrixXd params;         // t x p
  Eigen::VectorXd discrepancies;  // length t
  Transform transform_tag = Transform::kSe;

  int t() const { return static_cast<int>(params.rows()); }
  int p() const { return static_cast<int>(params.cols()); }

  void validate() const;  // throws ContractError

  std::vector<double> discrepancies_std() const {
    return std::vector<double>(discrepancies.data(),
                               discrepancies.data() + discrepancies.size());
  }
};

/// Builds a training set by transforming raw discrepancies.
TrainingSet make_training_set(const Eigen::MatrixXd& params,
                              const std::vector<double>& raw_deltas,
                              Transform transform);

}  // namespace gpabc
