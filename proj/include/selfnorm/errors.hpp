#pragma once

#include <stdexcept>
#include <string>

namespace selfnorm {

/// Inconsistent dimensions or an invalid configuration document.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A value outside an operation's documented domain.
class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Non-finite intermediate values (overflowing scores, NaN parameters).
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The requested computation exceeds what the chosen method supports.
class CapabilityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace selfnorm
