#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace fracpm {

// Argument outside the mathematical domain of an operation.
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Inconsistent inputs (grid mismatch, malformed configuration).
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// An iteration or expansion failed to reach its accuracy target.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Non-finite values appeared while time stepping.
class BlowupError : public std::runtime_error {
 public:
  BlowupError(std::size_t step, const std::string& what)
      : std::runtime_error(what + " (step " + std::to_string(step) + ")"), step_(step) {}
  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t step_;
};

// A proposed step broke an invariant; the caller should retry with a smaller dt.
class StepRejected : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// The Picard map did not contract on the requested horizon.
class HorizonError : public std::runtime_error {
 public:
  HorizonError(double horizon, double ratio, const std::string& what)
      : std::runtime_error(what), horizon_(horizon), ratio_(ratio) {}
  double horizon() const noexcept { return horizon_; }
  double ratio() const noexcept { return ratio_; }

 private:
  double horizon_;
  double ratio_;
};

}  // namespace fracpm
