#pragma once

#include <stdexcept>
#include <string>

namespace reacritic {

// Shape or dimension disagreement between operands.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Invalid configuration value (learning rate, env parameter, critic shape...).
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Argument outside the mathematical domain of a function.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Operation invoked in the wrong lifecycle state (e.g. stepping a finished episode).
class StateError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Caller broke an API precondition (non-scalar loss, mismatched architectures).
class ContractError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Replay buffer asked for more samples than it holds.
class UnderflowError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A tensor operation produced NaN or Inf.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Training produced a non-finite loss; the run is aborted.
class DivergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace reacritic
