#pragma once

#include <cstddef>
#include <vector>

#include "semrl/agents/env.hpp"
#include "semrl/core/rng.hpp"

namespace semrl::agents {

struct Transition {
  Observation obs;
  int action = 0;
  float reward = 0.0f;
  Observation next_obs;
  bool terminal = false;
};

// Fixed-capacity ring; the oldest transition is evicted first.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity = 10000);

  void push(Transition t);
  std::size_t size() const { return items_.size(); }
  std::size_t capacity() const { return capacity_; }
  // Oldest first.
  const Transition& at(std::size_t i) const;
  // Uniform with replacement; UsageError unless size() >= batch.
  std::vector<const Transition*> sample(std::size_t batch, rng::Engine& eng) const;

 private:
  std::size_t capacity_;
  std::vector<Transition> items_;
  std::size_t head_ = 0;  // next slot to overwrite once full
};

}  // namespace semrl::agents
