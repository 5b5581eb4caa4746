#pragma once

#include <memory>
#include <string>

#include "semrl/neural/layers.hpp"

namespace semrl::agents {

// Encoder followed by one linear Q head: [b] observations -> [b, actions].
template <typename T>
class QNetwork : public nn::Module<T> {
 public:
  QNetwork(const nn::EncoderSpec& spec, int actions, rng::Engine& init, const std::string& prefix = "q");
  nn::Tensor<T> forward(const nn::Batch& batch) const;
  std::vector<nn::Tensor<T>> parameters() const override;
  const nn::Encoder<T>& encoder() const { return *encoder_; }
  int actions() const { return head_.out_features(); }

 private:
  std::unique_ptr<nn::Encoder<T>> encoder_;
  nn::Linear<T> head_;
};

// Policy logits and state value from either one shared encoder or two.
template <typename T>
class PolicyValueNet : public nn::Module<T> {
 public:
  PolicyValueNet(const nn::EncoderSpec& spec, int actions, bool separate_encoders, rng::Engine& init,
                 const std::string& prefix = "pv");

  struct Output {
    nn::Tensor<T> logits;  // [b, actions]
    nn::Tensor<T> values;  // [b]
  };
  Output forward(const nn::Batch& batch) const;
  std::vector<nn::Tensor<T>> parameters() const override;
  const nn::Encoder<T>& encoder() const { return *policy_encoder_; }
  int actions() const { return policy_head_.out_features(); }

 private:
  std::unique_ptr<nn::Encoder<T>> policy_encoder_;
  std::unique_ptr<nn::Encoder<T>> value_encoder_;  // null when shared
  nn::Linear<T> policy_head_, value_head_;
};

}  // namespace semrl::agents
