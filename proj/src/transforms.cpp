#include "gpabc/transforms.hpp"

#include <cmath>

#include "gpabc/errors.hpp"

namespace gpabc {

std::string to_string(Transform t) {
  switch (t) {
    case Transform::kSe: return "se";
    case Transform::kLog: return "log";
    case Transform::kSqrt: return "sqrt";
  }
  return "?";
}

Transform transform_from_string(const std::string& tag) {
  if (tag == "se") return Transform::kSe;
  if (tag == "log") return Transform::kLog;
  if (tag == "sqrt") return Transform::kSqrt;
  throw ContractError("unknown transform tag '" + tag + "' (expected se|log|sqrt)");
}

double apply_transform(Transform t, double delta) {
  switch (t) {
    case Transform::kSe:
      return delta;
    case Transform::kLog:
      if (!(delta > 0.0)) {
        throw DomainError("log transform requires a positive discrepancy, got " +
                          std::to_string(delta));
      }
      return std::log(delta);
    case Transform::kSqrt:
      if (delta < 0.0) {
        throw DomainError("sqrt transform requires a nonnegative discrepancy, got " +
                          std::to_string(delta));
      }
      return std::sqrt(delta);
  }
  throw ContractError("unreachable transform tag");
}

double invert_transform(Transform t, double value) {
  switch (t) {
    case Transform::kSe: return value;
    case Transform::kLog: return std::exp(value);
    case Transform::kSqrt: return value * value;
  }
  throw ContractError("unreachable transform tag");
}

double transform_threshold(Transform t, double eps) { return apply_transform(t, eps); }

double transform_log_jacobian(Transform t, double delta) {
  switch (t) {
    case Transform::kSe:
      return 0.0;
    case Transform::kLog:
      if (!(delta > 0.0)) throw DomainError("log jacobian undefined at nonpositive input");
      return -std::log(delta);
    case Transform::kSqrt:
      if (!(delta > 0.0)) throw DomainError("sqrt jacobian undefined at nonpositive input");
      return -std::log(2.0 * std::sqrt(delta));
  }
  throw ContractError("unreachable transform tag");
}

std::vector<double> apply_transform(Transform t, const std::vector<double>& deltas) {
  std::vector<double> out;
  out.reserve(deltas.size());
  for (double d : deltas) out.push_back(apply_transform(t, d));
  return out;
}

}  // namespace gpabc
