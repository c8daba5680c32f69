#pragma once

#include <stdexcept>
#include <string>

namespace offload {

// Parameters outside the model's valid region (infeasible deadline, exponent
// overflow, out-of-range fraction).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Nonfinite losses or metrics. Maps to exit code 3 in the CLI.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Follower derivative not monotone on the bisection bracket.
class ConcavityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Operation called in the wrong lifecycle state (stepping a finished auction).
class StateError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace offload
