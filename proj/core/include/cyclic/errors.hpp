#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace cyclic {

/// Bad user input: parameters, configs, model descriptions. Maps to CLI exit code 1.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A model evaluated outside the region where it is well defined
/// (mass matrix not positive definite, singular cyclic block, ...).
class DomainError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Nonlinear solve failed. Carries the residual-norm history.
class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string& what, std::vector<double> residual_trace)
      : std::runtime_error(what), trace_(std::move(residual_trace)) {}

  const std::vector<double>& trace() const noexcept { return trace_; }

 private:
  std::vector<double> trace_;
};

/// Time integration aborted (domain exit or non-finite state).
class IntegrationError : public std::runtime_error {
 public:
  IntegrationError(const std::string& what, double time)
      : std::runtime_error(what + " at t=" + std::to_string(time)), message_(what), time_(time) {}

  double time() const noexcept { return time_; }
  /// Message without the time suffix.
  const std::string& message() const noexcept { return message_; }

 private:
  std::string message_;
  double time_;
};

}  // namespace cyclic
