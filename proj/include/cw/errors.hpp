#pragma once

#include <stdexcept>
#include <string>

namespace cw {

/// Argument outside the mathematical domain of an operation.
struct DomainError : std::domain_error {
  using std::domain_error::domain_error;
};

/// A request would exceed a configured memory budget.
struct ResourceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Invalid experiment configuration (CLI flags, config files).
struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

}  // namespace cw
