#pragma once

#include <stdexcept>
#include <string>

namespace semval {

// Error taxonomy used across the library. CLI maps each class to a distinct
// exit code, so throw the most specific one that applies.

// Malformed input: bad sizes, invalid config values, violated preconditions.
using InvalidArgument = std::invalid_argument;

// Request is well-formed but exceeds a hard limit (e.g. exact enumeration
// beyond the player-count guard).
class ResourceLimitError : public std::runtime_error {
 public:
  explicit ResourceLimitError(const std::string& what) : std::runtime_error(what) {}
};

// Computation failed numerically: singular system after fallback, divergent
// iterate, non-finite intermediate.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

// Valid concept, deliberately out of scope for this build.
class UnsupportedError : public std::runtime_error {
 public:
  explicit UnsupportedError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace semval
