#pragma once

#include <stdexcept>
#include <string>

namespace qpq {

// Argument outside the mathematical domain of an operation (theta out of
// range, mismatched dimensions, wrong key length).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Request exceeds a fixed size cap (density-operator dimension, parity k).
class CapacityError : public std::length_error {
 public:
  using std::length_error::length_error;
};

// Photon budget or similar runtime resource exhausted.
class ResourceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// No parameter choice satisfies a planning request.
class PlanningError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Alice holds no usable final-key bit; the session must be restarted.
class RestartRequired : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Too few known bits to sample for an error-rate estimate.
class InsufficientKey : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace qpq
