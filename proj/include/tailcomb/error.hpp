#pragma once

#include <stdexcept>

namespace tailcomb {

// Argument outside the mathematical domain of an operation (p-value outside
// [0,1], nu <= 0, |rho| >= 1, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Inconsistent or unsupported configuration: dimension mismatches, invalid
// weights, unsupported test pairings, malformed model or measure files.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// An iterative numerical routine failed to converge or produced a non-finite
// result.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace tailcomb
