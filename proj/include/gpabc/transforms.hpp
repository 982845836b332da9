#pragma once

#include <string>
#include <vector>

namespace gpabc {

/// Transform applied to raw (squared-error style) discrepancies before GP
/// regression. Tags appear verbatim in CLI flags and CSV columns.
enum class Transform { kSe, kLog, kSqrt };

std::string to_string(Transform t);
Transform transform_from_string(const std::string& tag);

/// g(delta). Throws DomainError for log of nonpositive or sqrt of negative
/// input; zeros are never silently floored.
double apply_transform(Transform t, double delta);

/// Inverse of apply_transform on its range.
double invert_transform(Transform t, double value);

/// Threshold transported to the transformed scale, eps' = g(eps). Preserves
/// the indicator: 1{delta <= eps} == 1{g(delta) <= g(eps)}.
double transform_threshold(Transform t, double eps);

/// log |g'(delta)|; the change-of-variables correction used to compare
/// predictive densities across transforms on the common raw scale.
double transform_log_jacobian(Transform t, double delta);

/// Applies the transform elementwise.
std::vector<double> apply_transform(Transform t, const std::vector<double>& deltas);

}  // namespace gpabc
