#include "semrl/agents/replay.hpp"

#include <string>

#include "semrl/core/error.hpp"

namespace semrl::agents {

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) throw ConfigError("replay capacity must be positive");
  items_.reserve(capacity);
}

void ReplayBuffer::push(Transition t) {
  if (items_.size() < capacity_) {
    items_.push_back(std::move(t));
    return;
  }
  items_[head_] = std::move(t);
  head_ = (head_ + 1) % capacity_;
}

const Transition& ReplayBuffer::at(std::size_t i) const {
  if (i >= items_.size()) throw UsageError("replay index out of range");
  return items_[(head_ + i) % items_.size()];
}

std::vector<const Transition*> ReplayBuffer::sample(std::size_t batch, rng::Engine& eng) const {
  if (batch == 0 || items_.size() < batch) {
    throw UsageError("cannot sample " + std::to_string(batch) + " transitions from a buffer of " +
                     std::to_string(items_.size()));
  }
  std::vector<const Transition*> out(batch);
  for (auto& p : out) p = &items_[rng::below(eng, static_cast<std::uint64_t>(items_.size()))];
  return out;
}

}  // namespace semrl::agents
