#pragma once

#include <stdexcept>
#include <string>

namespace gpsurv {

// Argument outside a function's mathematical domain (nonpositive time, empty interval, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Malformed input data, files or configuration.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A likelihood or model kind was paired with records it cannot consume.
class UnsupportedError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Covariance matrix could not be factorized even at the largest jitter.
class IllConditionedError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// An optimizer or a model that requires a converged fit was handed an unconverged one.
class NotConvergedError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Quadrature or other numeric procedure failed to reach its tolerance.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace gpsurv
