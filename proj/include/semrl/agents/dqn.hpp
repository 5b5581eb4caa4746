#pragma once

#include <cstdint>
#include <vector>

#include "semrl/agents/networks.hpp"
#include "semrl/agents/replay.hpp"
#include "semrl/core/kv_config.hpp"
#include "semrl/neural/optim.hpp"

namespace semrl::agents {

struct DqnConfig {
  double gamma = 0.99;
  double eps_start = 1.0;
  double eps_end = 0.05;
  std::int64_t eps_decay_steps = 10000;
  std::int64_t target_update = 500;
  int batch = 32;
  std::size_t buffer = 10000;
  std::int64_t learning_starts = 1000;
  int train_freq = 4;
  double lr = 1e-3;
  double adam_eps = 1.5e-4;
  // 0 disables clipping.
  double max_grad_norm = 10.0;

  void validate() const;
  static DqnConfig from_kv(const KvConfig& kv, DqnConfig base);
  static DqnConfig from_kv(const KvConfig& kv);
  void to_kv(KvConfig& kv) const;
};

// Linear decay from eps_start to eps_end over eps_decay_steps, then flat.
double epsilon_at(const DqnConfig& cfg, std::int64_t step);

// Index of the largest value; ties go to the lowest index.
int greedy_action(const std::vector<float>& q);

// Mean over the batch of (y - Q(s,a))^2 with y = r for terminal transitions
// and y = r + gamma * next_max otherwise. `q` is [b, actions]; y is a constant.
template <typename T>
nn::Tensor<T> td_loss(const nn::Tensor<T>& q, const std::vector<int>& actions, const std::vector<double>& rewards,
                      const std::vector<double>& next_max, const std::vector<bool>& terminals, double gamma);

// TD loss of a sampled batch; gradients reach only the online network.
template <typename T>
nn::Tensor<T> dqn_td_loss(const std::vector<const Transition*>& batch, const QNetwork<T>& online,
                          const QNetwork<T>& target, const ObsSpec& spec, double gamma);

class DqnAgent {
 public:
  DqnAgent(const ObsSpec& spec, int actions, const nn::EncoderSpec& encoder, const DqnConfig& cfg,
           std::uint64_t seed);

  // Epsilon-greedy. Always consumes one exploration draw, plus one more when exploring.
  int act(const Observation& obs, double epsilon);
  std::vector<float> q_values(const Observation& obs) const;

  void remember(Transition t) { buffer_.push(std::move(t)); }
  // One Adam step on a uniformly sampled minibatch; returns the loss.
  double update();
  void sync_target();

  const DqnConfig& config() const { return cfg_; }
  const ObsSpec& spec() const { return spec_; }
  const QNetwork<float>& online() const { return online_; }
  const QNetwork<float>& target() const { return target_; }
  const ReplayBuffer& buffer() const { return buffer_; }
  std::vector<nn::Tensor<float>> parameters() const { return online_.parameters(); }
  std::int64_t updates() const { return optimizer_.steps(); }

 private:
  ObsSpec spec_;
  DqnConfig cfg_;
  rng::Engine init_, explore_, minibatch_;
  QNetwork<float> online_, target_;
  nn::Adam<float> optimizer_;
  ReplayBuffer buffer_;
};

}  // namespace semrl::agents
