#include "semrl/agents/ppo.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "semrl/core/error.hpp"

namespace semrl::agents {

void PpoConfig::validate() const {
  auto fail = [](const std::string& m) { throw ConfigError("ppo: " + m); };
  if (!(clip > 0.0 && clip < 1.0)) fail("clip must be in (0,1)");
  if (!(lambda >= 0.0 && lambda <= 1.0)) fail("lambda must be in [0,1]");
  if (!(gamma >= 0.0 && gamma <= 1.0)) fail("gamma must be in [0,1]");
  if (rollout < 1 || epochs < 1 || minibatch < 1) fail("rollout, epochs and minibatch must be >= 1");
  if (vf_coef < 0.0 || ent_coef < 0.0) fail("loss coefficients must be >= 0");
  if (!(lr > 0.0)) fail("lr must be positive");
  if (!(adam_eps > 0.0)) fail("adam_eps must be positive");
  if (max_grad_norm < 0.0) fail("max_grad_norm must be >= 0");
}

PpoConfig PpoConfig::from_kv(const KvConfig& kv, PpoConfig c) {
  c.clip = kv.get_double("ppo.clip", c.clip);
  c.lambda = kv.get_double("ppo.lambda", c.lambda);
  c.gamma = kv.get_double("ppo.gamma", c.gamma);
  c.rollout = static_cast<int>(kv.get_int("ppo.rollout", c.rollout));
  c.epochs = static_cast<int>(kv.get_int("ppo.epochs", c.epochs));
  c.minibatch = static_cast<int>(kv.get_int("ppo.minibatch", c.minibatch));
  c.vf_coef = kv.get_double("ppo.vf_coef", c.vf_coef);
  c.ent_coef = kv.get_double("ppo.ent_coef", c.ent_coef);
  c.lr = kv.get_double("ppo.lr", c.lr);
  c.adam_eps = kv.get_double("ppo.adam_eps", c.adam_eps);
  c.max_grad_norm = kv.get_double("ppo.max_grad_norm", c.max_grad_norm);
  c.separate_encoders = kv.get_bool("ppo.separate_encoders", c.separate_encoders);
  c.validate();
  return c;
}

PpoConfig PpoConfig::from_kv(const KvConfig& kv) { return from_kv(kv, PpoConfig{}); }

void PpoConfig::to_kv(KvConfig& kv) const {
  kv.set("ppo.clip", format_number(clip));
  kv.set("ppo.lambda", format_number(lambda));
  kv.set("ppo.gamma", format_number(gamma));
  kv.set("ppo.rollout", std::to_string(rollout));
  kv.set("ppo.epochs", std::to_string(epochs));
  kv.set("ppo.minibatch", std::to_string(minibatch));
  kv.set("ppo.vf_coef", format_number(vf_coef));
  kv.set("ppo.ent_coef", format_number(ent_coef));
  kv.set("ppo.lr", format_number(lr));
  kv.set("ppo.adam_eps", format_number(adam_eps));
  kv.set("ppo.max_grad_norm", format_number(max_grad_norm));
  kv.set("ppo.separate_encoders", separate_encoders ? "true" : "false");
}

GaeResult gae(const std::vector<double>& rewards, const std::vector<double>& values,
              const std::vector<double>& next_values, const std::vector<bool>& dones, double gamma, double lambda) {
  const std::size_t n = rewards.size();
  if (values.size() != n || next_values.size() != n || dones.size() != n) {
    throw ShapeError("gae: rollout fields differ in length");
  }
  GaeResult out;
  out.advantages.assign(n, 0.0);
  out.returns.assign(n, 0.0);
  double running = 0.0;
  for (std::size_t k = n; k-- > 0;) {
    const double delta = rewards[k] + gamma * next_values[k] - values[k];
    running = delta + (dones[k] ? 0.0 : gamma * lambda * running);
    out.advantages[k] = running;
    out.returns[k] = running + values[k];
  }
  return out;
}

GaeResult gae(const std::vector<double>& rewards, const std::vector<double>& values, double gamma, double lambda) {
  const std::size_t n = rewards.size();
  if (values.size() != n + 1) throw ShapeError("gae: values must hold one bootstrap entry past the rewards");
  std::vector<double> v(values.begin(), values.end() - 1);
  std::vector<double> next(values.begin() + 1, values.end());
  std::vector<bool> dones(n, false);
  return gae(rewards, v, next, dones, gamma, lambda);
}

void normalize_advantages(std::vector<double>& adv) {
  if (adv.empty()) return;
  const double n = static_cast<double>(adv.size());
  const double mean = std::accumulate(adv.begin(), adv.end(), 0.0) / n;
  double var = 0.0;
  for (double a : adv) var += (a - mean) * (a - mean);
  const double sd = std::max(std::sqrt(var / n), 1e-8);
  for (double& a : adv) a = (a - mean) / sd;
}

template <typename T>
PpoLoss<T> ppo_loss(const nn::Tensor<T>& logits, const nn::Tensor<T>& values, const std::vector<int>& actions,
                    const std::vector<double>& logp_old, const std::vector<double>& advantages,
                    const std::vector<double>& returns, double clip, double vf_coef, double ent_coef) {
  const int b = static_cast<int>(actions.size());
  if (b == 0) throw UsageError("ppo_loss on an empty minibatch");
  if (logits.rank() != 2 || logits.dim(0) != b || values.size() != static_cast<std::size_t>(b) ||
      logp_old.size() != actions.size() || advantages.size() != actions.size() || returns.size() != actions.size()) {
    throw ShapeError("ppo_loss: minibatch fields differ in length");
  }
  auto constant = [b](const std::vector<double>& v) {
    return nn::Tensor<T>::from({b}, std::vector<T>(v.begin(), v.end()));
  };
  const auto logp_all = nn::log_softmax(logits);
  const auto ratio = nn::exp(nn::sub(nn::gather_cols(logp_all, actions), constant(logp_old)));
  PpoLoss<T> out;
  int clipped = 0;
  for (int i = 0; i < b; ++i) {
    const double r = static_cast<double>(ratio.data()[i]);
    if (!std::isfinite(r)) throw TrainingError("ppo: probability ratio is not finite for sample " + std::to_string(i));
    if (std::abs(r - 1.0) > clip) ++clipped;
  }
  out.clip_fraction = static_cast<double>(clipped) / b;
  const auto adv = constant(advantages);
  const auto surrogate = nn::mean(nn::minimum(
      nn::mul(ratio, adv), nn::mul(nn::clip(ratio, static_cast<T>(1.0 - clip), static_cast<T>(1.0 + clip)), adv)));
  const auto value_loss = nn::mean(nn::square(nn::sub(values, constant(returns))));
  const auto entropy = nn::scale(nn::sum(nn::mul(nn::softmax(logits), logp_all)), static_cast<T>(-1.0 / b));
  out.objective = static_cast<double>(surrogate.item());
  out.value_loss = static_cast<double>(value_loss.item());
  out.entropy = static_cast<double>(entropy.item());
  out.total = nn::add(nn::add(nn::scale(surrogate, T(-1)), nn::scale(value_loss, static_cast<T>(vf_coef))),
                      nn::scale(entropy, static_cast<T>(-ent_coef)));
  return out;
}

void Rollout::clear() {
  obs.clear();
  actions.clear();
  logp.clear();
  values.clear();
  rewards.clear();
  next_values.clear();
  dones.clear();
}

PpoAgent::PpoAgent(const ObsSpec& spec, int actions, const nn::EncoderSpec& encoder, const PpoConfig& cfg,
                   std::uint64_t seed)
    : spec_(spec),
      cfg_(cfg),
      init_(rng::make_engine(seed, rng::Stream::kInit)),
      explore_(rng::make_engine(seed, rng::Stream::kExploration)),
      minibatch_(rng::make_engine(seed, rng::Stream::kMinibatch)),
      net_(encoder, actions, cfg.separate_encoders, init_),
      optimizer_(net_.parameters(), nn::AdamConfig{cfg.lr, 0.9, 0.999, cfg.adam_eps}) {
  cfg_.validate();
}

PolicySample PpoAgent::act(const Observation& obs) {
  nn::NoGrad guard;
  const auto out = net_.forward(make_batch(spec_, {&obs}));
  const auto lp = nn::log_softmax(out.logits);
  const int n = lp.dim(1);
  PolicySample s;
  s.value = static_cast<double>(out.values.data()[0]);
  const double u = rng::unit(explore_);
  double acc = 0.0;
  s.action = n - 1;
  for (int a = 0; a < n; ++a) {
    acc += std::exp(static_cast<double>(lp.data()[a]));
    if (u < acc) {
      s.action = a;
      break;
    }
  }
  s.logp = static_cast<double>(lp.data()[s.action]);
  return s;
}

double PpoAgent::value(const Observation& obs) const {
  nn::NoGrad guard;
  return static_cast<double>(net_.forward(make_batch(spec_, {&obs})).values.data()[0]);
}

std::vector<double> PpoAgent::probabilities(const Observation& obs) const {
  nn::NoGrad guard;
  const auto p = nn::softmax(net_.forward(make_batch(spec_, {&obs})).logits);
  return {p.data().begin(), p.data().end()};
}

PpoUpdateStats PpoAgent::update(const Rollout& ro) {
  const std::size_t n = ro.size();
  PpoUpdateStats stats;
  if (n == 0) return stats;
  auto g = gae(ro.rewards, ro.values, ro.next_values, ro.dones, cfg_.gamma, cfg_.lambda);
  normalize_advantages(g.advantages);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  const std::size_t mb = static_cast<std::size_t>(cfg_.minibatch);
  auto params = net_.parameters();
  double clip_sum = 0.0, loss_sum = 0.0, ent_sum = 0.0;
  for (int epoch = 0; epoch < cfg_.epochs; ++epoch) {
    // Fisher-Yates with the minibatch stream.
    for (std::size_t i = n; i > 1; --i) {
      std::swap(order[i - 1], order[static_cast<std::size_t>(rng::below(minibatch_, static_cast<std::uint64_t>(i)))]);
    }
    for (std::size_t start = 0; start < n; start += mb) {
      const std::size_t end = std::min(n, start + mb);
      std::vector<const Observation*> obs;
      std::vector<int> actions;
      std::vector<double> logp_old, adv, ret;
      for (std::size_t j = start; j < end; ++j) {
        const std::size_t k = order[j];
        obs.push_back(&ro.obs[k]);
        actions.push_back(ro.actions[k]);
        logp_old.push_back(ro.logp[k]);
        adv.push_back(g.advantages[k]);
        ret.push_back(g.returns[k]);
      }
      const auto out = net_.forward(make_batch(spec_, obs));
      const auto loss = ppo_loss(out.logits, out.values, actions, logp_old, adv, ret, cfg_.clip, cfg_.vf_coef,
                                 cfg_.ent_coef);
      const double value = loss.total.item();
      if (!std::isfinite(value)) {
        throw TrainingError("ppo: loss is not finite after " + std::to_string(optimizer_.steps()) + " updates");
      }
      nn::backward(loss.total);
      if (cfg_.max_grad_norm > 0.0) nn::clip_grad_norm(params, cfg_.max_grad_norm);
      optimizer_.step();
      clip_sum += loss.clip_fraction;
      loss_sum += value;
      ent_sum += loss.entropy;
      ++stats.minibatches;
    }
  }
  stats.clip_fraction = clip_sum / stats.minibatches;
  stats.loss = loss_sum / stats.minibatches;
  stats.entropy = ent_sum / stats.minibatches;
  return stats;
}

template struct PpoLoss<float>;
template struct PpoLoss<double>;
template PpoLoss<float> ppo_loss(const nn::Tensor<float>&, const nn::Tensor<float>&, const std::vector<int>&,
                                 const std::vector<double>&, const std::vector<double>&, const std::vector<double>&,
                                 double, double, double);
template PpoLoss<double> ppo_loss(const nn::Tensor<double>&, const nn::Tensor<double>&, const std::vector<int>&,
                                  const std::vector<double>&, const std::vector<double>&, const std::vector<double>&,
                                  double, double, double);

}  // namespace semrl::agents
