#pragma once

#include <stdexcept>
#include <string>

namespace seirenes {

// Caller broke a documented precondition (bad index, shape mismatch, ...).
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Invalid run configuration; the message names the offending key.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Hint token outside its vocabulary.
class MalformedHint : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A gradient or updated parameter became NaN/Inf.
class NonFiniteGradient : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// The active pool is empty: every question has been retired.
class TrainingComplete : public std::runtime_error {
 public:
  TrainingComplete() : std::runtime_error("active pool is empty") {}
};

}  // namespace seirenes
