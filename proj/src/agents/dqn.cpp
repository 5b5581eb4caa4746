#include "semrl/agents/dqn.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "semrl/core/error.hpp"

namespace semrl::agents {

void DqnConfig::validate() const {
  auto fail = [](const std::string& m) { throw ConfigError("dqn: " + m); };
  if (!(gamma >= 0.0 && gamma <= 1.0)) fail("gamma must be in [0,1]");
  if (!(eps_start >= 0.0 && eps_start <= 1.0 && eps_end >= 0.0 && eps_end <= 1.0)) fail("epsilon must be in [0,1]");
  if (eps_decay_steps < 0) fail("eps_decay_steps must be >= 0");
  if (target_update < 1) fail("target_update must be >= 1");
  if (batch < 1) fail("batch must be >= 1");
  if (buffer < static_cast<std::size_t>(batch)) fail("buffer must hold at least one batch");
  if (learning_starts < 0) fail("learning_starts must be >= 0");
  if (train_freq < 1) fail("train_freq must be >= 1");
  if (!(lr > 0.0)) fail("lr must be positive");
  if (!(adam_eps > 0.0)) fail("adam_eps must be positive");
  if (max_grad_norm < 0.0) fail("max_grad_norm must be >= 0");
}

DqnConfig DqnConfig::from_kv(const KvConfig& kv, DqnConfig c) {
  c.gamma = kv.get_double("dqn.gamma", c.gamma);
  c.eps_start = kv.get_double("dqn.eps_start", c.eps_start);
  c.eps_end = kv.get_double("dqn.eps_end", c.eps_end);
  c.eps_decay_steps = kv.get_int("dqn.eps_decay_steps", c.eps_decay_steps);
  c.target_update = kv.get_int("dqn.target_update", c.target_update);
  c.batch = static_cast<int>(kv.get_int("dqn.batch", c.batch));
  c.buffer = static_cast<std::size_t>(kv.get_int("dqn.buffer", static_cast<std::int64_t>(c.buffer)));
  c.learning_starts = kv.get_int("dqn.learning_starts", c.learning_starts);
  c.train_freq = static_cast<int>(kv.get_int("dqn.train_freq", c.train_freq));
  c.lr = kv.get_double("dqn.lr", c.lr);
  c.adam_eps = kv.get_double("dqn.adam_eps", c.adam_eps);
  c.max_grad_norm = kv.get_double("dqn.max_grad_norm", c.max_grad_norm);
  c.validate();
  return c;
}

DqnConfig DqnConfig::from_kv(const KvConfig& kv) { return from_kv(kv, DqnConfig{}); }

void DqnConfig::to_kv(KvConfig& kv) const {
  kv.set("dqn.gamma", format_number(gamma));
  kv.set("dqn.eps_start", format_number(eps_start));
  kv.set("dqn.eps_end", format_number(eps_end));
  kv.set("dqn.eps_decay_steps", std::to_string(eps_decay_steps));
  kv.set("dqn.target_update", std::to_string(target_update));
  kv.set("dqn.batch", std::to_string(batch));
  kv.set("dqn.buffer", std::to_string(buffer));
  kv.set("dqn.learning_starts", std::to_string(learning_starts));
  kv.set("dqn.train_freq", std::to_string(train_freq));
  kv.set("dqn.lr", format_number(lr));
  kv.set("dqn.adam_eps", format_number(adam_eps));
  kv.set("dqn.max_grad_norm", format_number(max_grad_norm));
}

double epsilon_at(const DqnConfig& cfg, std::int64_t step) {
  if (cfg.eps_decay_steps <= 0 || step >= cfg.eps_decay_steps) return cfg.eps_end;
  const double f = static_cast<double>(step) / static_cast<double>(cfg.eps_decay_steps);
  return cfg.eps_start + f * (cfg.eps_end - cfg.eps_start);
}

int greedy_action(const std::vector<float>& q) {
  if (q.empty()) throw UsageError("greedy_action on an empty value vector");
  int best = 0;
  for (int a = 1; a < static_cast<int>(q.size()); ++a) {
    if (q[a] > q[best]) best = a;
  }
  return best;
}

template <typename T>
nn::Tensor<T> td_loss(const nn::Tensor<T>& q, const std::vector<int>& actions, const std::vector<double>& rewards,
                      const std::vector<double>& next_max, const std::vector<bool>& terminals, double gamma) {
  const std::size_t b = actions.size();
  if (b == 0) throw UsageError("td_loss on an empty batch");
  if (rewards.size() != b || next_max.size() != b || terminals.size() != b) {
    throw ShapeError("td_loss: batch fields differ in length");
  }
  std::vector<T> y(b);
  for (std::size_t i = 0; i < b; ++i) {
    y[i] = static_cast<T>(terminals[i] ? rewards[i] : rewards[i] + gamma * next_max[i]);
  }
  const auto target = nn::Tensor<T>::from({static_cast<int>(b)}, std::move(y));
  return nn::mean(nn::square(nn::sub(nn::gather_cols(q, actions), target)));
}

template <typename T>
nn::Tensor<T> dqn_td_loss(const std::vector<const Transition*>& batch, const QNetwork<T>& online,
                          const QNetwork<T>& target, const ObsSpec& spec, double gamma) {
  if (batch.empty()) throw UsageError("dqn_td_loss on an empty batch");
  std::vector<const Observation*> obs, next;
  std::vector<int> actions;
  std::vector<double> rewards, next_max;
  std::vector<bool> terminals;
  for (const auto* t : batch) {
    obs.push_back(&t->obs);
    next.push_back(&t->next_obs);
    actions.push_back(t->action);
    rewards.push_back(t->reward);
    terminals.push_back(t->terminal);
  }
  {
    nn::NoGrad guard;
    const auto qn = target.forward(make_batch(spec, next));
    const int a = qn.dim(1);
    for (std::size_t i = 0; i < batch.size(); ++i) {
      const auto* row = qn.data().data() + i * a;
      next_max.push_back(static_cast<double>(*std::max_element(row, row + a)));
    }
  }
  return td_loss(online.forward(make_batch(spec, obs)), actions, rewards, next_max, terminals, gamma);
}

DqnAgent::DqnAgent(const ObsSpec& spec, int actions, const nn::EncoderSpec& encoder, const DqnConfig& cfg,
                   std::uint64_t seed)
    : spec_(spec),
      cfg_(cfg),
      init_(rng::make_engine(seed, rng::Stream::kInit)),
      explore_(rng::make_engine(seed, rng::Stream::kExploration)),
      minibatch_(rng::make_engine(seed, rng::Stream::kMinibatch)),
      online_(encoder, actions, init_, "q"),
      target_(encoder, actions, init_, "q"),
      optimizer_(online_.parameters(), nn::AdamConfig{cfg.lr, 0.9, 0.999, cfg.adam_eps}),
      buffer_(cfg.buffer) {
  cfg_.validate();
  sync_target();
}

std::vector<float> DqnAgent::q_values(const Observation& obs) const {
  nn::NoGrad guard;
  return online_.forward(make_batch(spec_, {&obs})).data();
}

int DqnAgent::act(const Observation& obs, double epsilon) {
  const double u = rng::unit(explore_);
  if (u < epsilon) return rng::below(explore_, online_.actions());
  return greedy_action(q_values(obs));
}

double DqnAgent::update() {
  const auto batch = buffer_.sample(static_cast<std::size_t>(cfg_.batch), minibatch_);
  const auto loss = dqn_td_loss(batch, online_, target_, spec_, cfg_.gamma);
  const double value = loss.item();
  if (!std::isfinite(value)) throw TrainingError("dqn: TD loss is not finite after " +
                                                 std::to_string(optimizer_.steps()) + " updates");
  nn::backward(loss);
  if (cfg_.max_grad_norm > 0.0) {
    auto params = online_.parameters();
    nn::clip_grad_norm(params, cfg_.max_grad_norm);
  }
  optimizer_.step();
  return value;
}

void DqnAgent::sync_target() { nn::copy_parameters(online_, target_); }

template nn::Tensor<float> td_loss(const nn::Tensor<float>&, const std::vector<int>&, const std::vector<double>&,
                                   const std::vector<double>&, const std::vector<bool>&, double);
template nn::Tensor<double> td_loss(const nn::Tensor<double>&, const std::vector<int>&, const std::vector<double>&,
                                    const std::vector<double>&, const std::vector<bool>&, double);
template nn::Tensor<float> dqn_td_loss(const std::vector<const Transition*>&, const QNetwork<float>&,
                                       const QNetwork<float>&, const ObsSpec&, double);
template nn::Tensor<double> dqn_td_loss(const std::vector<const Transition*>&, const QNetwork<double>&,
                                        const QNetwork<double>&, const ObsSpec&, double);

}  // namespace semrl::agents
