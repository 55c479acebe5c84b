#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace robust_etc {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Shape mismatch or otherwise malformed argument (non-square, asymmetric,
/// non-finite entries, invalid scalar parameter).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// A computation could not be carried out to working precision.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// Fixed-point iteration exhausted its budget.
class ConvergenceError : public NumericalError {
 public:
  ConvergenceError(const std::string& what, int iterations, double last_step)
      : NumericalError(what), iterations_(iterations), last_step_(last_step) {}

  int iterations() const noexcept { return iterations_; }
  double last_step() const noexcept { return last_step_; }

 private:
  int iterations_;
  double last_step_;
};

/// A matrix inequality that the design requires for an object to exist
/// (e.g. ε⁻¹I − P > 0 before Z can be formed) does not hold.
///
/// `condition()` is the short identifier used throughout the reports
/// ("14", "24", ...), `margin()` the offending smallest eigenvalue.
class ConditionViolation : public NumericalError {
 public:
  ConditionViolation(std::string condition, double margin, const std::string& what)
      : NumericalError(what), condition_(std::move(condition)), margin_(margin) {}

  const std::string& condition() const noexcept { return condition_; }
  double margin() const noexcept { return margin_; }

 private:
  std::string condition_;
  double margin_;
};

}  // namespace robust_etc
