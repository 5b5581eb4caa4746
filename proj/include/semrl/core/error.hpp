#pragma once

#include <stdexcept>
#include <string>

namespace semrl {

// Invalid arena, grid, or experiment configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// API misuse, e.g. stepping a terminal state or an empty sweep list.
class UsageError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Tensor shapes incompatible with an op.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Non-finite values during optimisation.
class TrainingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Out-of-range token ids, malformed checkpoints.
class CorruptionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace semrl
