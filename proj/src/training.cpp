#include "gpabc/training.hpp"

#include <cmath>

#include "gpabc/errors.hpp"

namespace gpabc {

void TrainingSet::validate() const {
  if (params.rows() < 1) {
    throw ContractError("TrainingSet: at least one point is required");
  }
  if (params.rows() != discrepancies.size()) {
    throw ContractError("TrainingSet: parameter/discrepancy count mismatch");
  }
  if (params.cols() < 1) {
    throw ContractError("TrainingSet: empty parameter dimension");
  }
  for (Eigen::Index i = 0; i < discrepancies.size(); ++i) {
    if (!std::isfinite(discrepancies(i))) {
      throw ContractError("TrainingSet: non-finite discrepancy at index " +
                          std::to_string(i));
    }
  }
}

TrainingSet make_training_set(const Eigen::MatrixXd& params,
                              const std::vector<double>& raw_deltas,
                              Transform transform) {
  if (static_cast<Eigen::Index>(raw_deltas.size()) != params.rows()) {
    throw ContractError("make_training_set: row count mismatch");
  }
  TrainingSet ts;
  ts.params = params;
  ts.transform_tag = transform;
  ts.discrepancies.resize(params.rows());
  for (Eigen::Index i = 0; i < params.rows(); ++i) {
    ts.discrepancies(i) =
        apply_transform(transform, raw_deltas[static_cast<std::size_t>(i)]);
  }
  ts.validate();
  return ts;
}

}  // namespace gpabc
