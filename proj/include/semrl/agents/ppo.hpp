#pragma once

#include <cstdint>
#include <vector>

#include "semrl/agents/networks.hpp"
#include "semrl/agents/env.hpp"
#include "semrl/core/kv_config.hpp"
#include "semrl/neural/optim.hpp"

namespace semrl::agents {

struct PpoConfig {
  double clip = 0.2;
  double lambda = 0.95;
  double gamma = 0.99;
  int rollout = 1024;
  int epochs = 4;
  int minibatch = 64;
  double vf_coef = 0.5;
  double ent_coef = 0.01;
  double lr = 3e-4;
  double adam_eps = 1e-5;
  // 0 disables clipping.
  double max_grad_norm = 0.5;
  bool separate_encoders = false;

  void validate() const;
  static PpoConfig from_kv(const KvConfig& kv, PpoConfig base);
  static PpoConfig from_kv(const KvConfig& kv);
  void to_kv(KvConfig& kv) const;
};

struct GaeResult {
  std::vector<double> advantages;
  std::vector<double> returns;  // advantages + values, before normalisation
};

// Generalised advantage estimation over a rollout that may span episodes.
// next_values[t] is the value of the state after step t (0 if terminal,
// the bootstrap estimate after a time-limit cut); dones[t] marks the last
// step of an episode, which stops the advantage recursion.
GaeResult gae(const std::vector<double>& rewards, const std::vector<double>& values,
              const std::vector<double>& next_values, const std::vector<bool>& dones, double gamma, double lambda);
// Single trajectory; values has one extra entry, the bootstrap value (0 if terminal).
GaeResult gae(const std::vector<double>& rewards, const std::vector<double>& values, double gamma, double lambda);

// In place: mean 0, std 1 with the std floored at 1e-8.
void normalize_advantages(std::vector<double>& adv);

template <typename T>
struct PpoLoss {
  nn::Tensor<T> total;
  double objective = 0.0;  // mean clipped surrogate
  double value_loss = 0.0;
  double entropy = 0.0;
  double clip_fraction = 0.0;  // share of samples with |ratio - 1| > clip
};

// total = -mean(min(r A, clip(r, 1-e, 1+e) A)) + vf_coef * mean((v - R)^2)
//         - ent_coef * mean entropy, with r = exp(log pi(a|s) - logp_old).
// A non-finite ratio throws TrainingError.
template <typename T>
PpoLoss<T> ppo_loss(const nn::Tensor<T>& logits, const nn::Tensor<T>& values, const std::vector<int>& actions,
                    const std::vector<double>& logp_old, const std::vector<double>& advantages,
                    const std::vector<double>& returns, double clip, double vf_coef, double ent_coef);

struct PolicySample {
  int action = 0;
  double logp = 0.0;
  double value = 0.0;
};

struct PpoUpdateStats {
  double loss = 0.0;
  double clip_fraction = 0.0;
  double entropy = 0.0;
  int minibatches = 0;
};

struct Rollout {
  std::vector<Observation> obs;
  std::vector<int> actions;
  std::vector<double> logp;
  std::vector<double> values;
  std::vector<double> rewards;
  std::vector<double> next_values;
  std::vector<bool> dones;

  std::size_t size() const { return actions.size(); }
  void clear();
};

class PpoAgent {
 public:
  PpoAgent(const ObsSpec& spec, int actions, const nn::EncoderSpec& encoder, const PpoConfig& cfg, std::uint64_t seed);

  // Samples from the current policy with the exploration stream.
  PolicySample act(const Observation& obs);
  double value(const Observation& obs) const;
  std::vector<double> probabilities(const Observation& obs) const;

  // One optimisation phase (epochs x shuffled minibatches) on a rollout
  // collected under the current parameters.
  PpoUpdateStats update(const Rollout& rollout);

  const PpoConfig& config() const { return cfg_; }
  const ObsSpec& spec() const { return spec_; }
  const PolicyValueNet<float>& net() const { return net_; }
  std::vector<nn::Tensor<float>> parameters() const { return net_.parameters(); }
  std::int64_t updates() const { return optimizer_.steps(); }

 private:
  ObsSpec spec_;
  PpoConfig cfg_;
  rng::Engine init_, explore_, minibatch_;
  PolicyValueNet<float> net_;
  nn::Adam<float> optimizer_;
};

}  // namespace semrl::agents
