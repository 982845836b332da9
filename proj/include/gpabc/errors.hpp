#pragma once

#include <stdexcept>
#include <string>

namespace gpabc {

/// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// A documented precondition was violated by the caller.
class ContractError : public Error {
 public:
  explicit ContractError(const std::string& msg) : Error(msg) {}
};

/// Input outside the mathematical domain of an operation (e.g. log of a
/// nonpositive discrepancy). Never silently floored.
class DomainError : public Error {
 public:
  explicit DomainError(const std::string& msg) : Error(msg) {}
};

/// Numerical breakdown: a covariance matrix that stays indefinite after
/// jitter escalation, an integrator step failure, and the like.
class NumericalError : public Error {
 public:
  explicit NumericalError(const std::string& msg) : Error(msg) {}
};

/// Model fitting failed (all restarts diverged, Newton did not converge, ...).
class FitError : public NumericalError {
 public:
  explicit FitError(const std::string& msg) : NumericalError(msg) {}
};

/// Classifier training data contains a single class; the caller must enlarge
/// the threshold or fall back to another surrogate.
class DegenerateLabelsError : public FitError {
 public:
  explicit DegenerateLabelsError(const std::string& msg) : FitError(msg) {}
};

/// Posterior density underflowed to zero everywhere on the grid.
class DegeneratePosteriorError : public NumericalError {
 public:
  explicit DegeneratePosteriorError(const std::string& msg) : NumericalError(msg) {}
};

/// Density estimation is impossible (e.g. no accepted samples).
class EstimationError : public NumericalError {
 public:
  explicit EstimationError(const std::string& msg) : NumericalError(msg) {}
};

/// No candidate survived disqualification in model selection.
class SelectionError : public Error {
 public:
  explicit SelectionError(const std::string& msg) : Error(msg) {}
};

/// Malformed input file; message carries the line number.
class ParseError : public Error {
 public:
  explicit ParseError(const std::string& msg) : Error(msg) {}
};

}  // namespace gpabc
