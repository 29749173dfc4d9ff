#pragma once

#include <stdexcept>
#include <string>

namespace rcb {

// Input outside the mathematical domain of an operation (boundary gradients,
// non-positive lambda, zero KL reference mass, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Invalid configuration or construction parameters.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Horizon too small for the selected grid (T < K * B^d).
class SizingError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

// A collaborator broke its contract at runtime (e.g. a loss outside [0,1]).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace rcb
