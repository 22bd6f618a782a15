#pragma once

#include <stdexcept>
#include <string>

namespace sbsim {

// Input that violates a model invariant (bad shapes, bad config values).
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Malformed or truncated binary/text artifact.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace sbsim
