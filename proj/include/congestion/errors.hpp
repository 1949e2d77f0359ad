#pragma once

#include <stdexcept>
#include <string>

namespace congestion {

// Input rejected: model assumptions, profile construction, domain checks.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Evaluation outside [0, M̄] of an arc cost.
class DomainError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

// A root could not be bracketed on the search interval.
class BracketingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Two routes that must agree did not, or an internal invariant broke.
class ConsistencyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Iterative oracle ran out of iterations.
class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A regime-specific construction was requested outside its premise.
class RegimeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace congestion
