#pragma once

#include <stdexcept>
#include <string>

namespace wgs {

/// Invalid argument: dimension mismatch, bad index, malformed input.
class ArgumentError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

/// A request exceeds a configured size cap (oracle size, block size, ...).
class CapacityError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// The represented state has zero norm, or a solve produced a null vector.
class DegenerateStateError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// A value left the representable floating point range.
class NumericRangeError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Malformed experiment configuration.
class ConfigError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

}  // namespace wgs
