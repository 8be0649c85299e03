#pragma once

#include <stdexcept>
#include <string>

namespace hoc {

// Input rejected by a precondition (arity, dimension, range).
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Requested computation is outside the supported size envelope.
class UnsupportedSize : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A theorem hypothesis needed to issue a certificate is missing.
class MissingHypothesis : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A Poincare constant was requested for a measure that has not been certified.
class Uncertified : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NonConvergence : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace hoc
