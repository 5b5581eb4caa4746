#include "semrl/agents/corridor.hpp"

#include <algorithm>
#include <cmath>

#include "semrl/core/error.hpp"

namespace semrl::agents {

CorridorEnv::CorridorEnv(int n, int max_steps) : n_(n), max_steps_(max_steps) {
  if (n < 2 || max_steps < 1) throw ConfigError("corridor needs n >= 2 and max_steps >= 1");
  spec_.layout = ObsLayout::kFeatures;
  spec_.sample_shape = {n};
}

CorridorEnv::Outcome CorridorEnv::transition(int s, int action) const {
  if (action != 0 && action != 1) throw UsageError("corridor action must be 0 or 1");
  Outcome o;
  o.next = action == 0 ? std::max(0, s - 1) : s + 1;
  o.terminal = o.next == goal();
  o.reward = o.terminal ? 1.0 : 0.0;
  return o;
}

Observation CorridorEnv::encode(int s) const {
  Observation o;
  o.features.assign(static_cast<std::size_t>(n_), 0.0f);
  o.features[static_cast<std::size_t>(s)] = 1.0f;
  return o;
}

Observation CorridorEnv::reset(std::uint64_t seed) {
  rng::Engine e(seed);
  s_ = rng::below(e, n_ - 1);
  t_ = 0;
  return encode(s_);
}

EnvStep CorridorEnv::step(int action) {
  if (s_ == goal()) throw UsageError("corridor stepped after reaching the goal");
  const auto o = transition(s_, action);
  s_ = o.next;
  ++t_;
  EnvStep out;
  out.obs = encode(s_);
  out.reward = o.reward;
  out.terminal = o.terminal;
  out.truncated = !o.terminal && t_ >= max_steps_;
  return out;
}

std::vector<std::array<double, 2>> corridor_q_star(const CorridorEnv& env, double gamma, double tol) {
  const int n = env.states();
  std::vector<double> v(static_cast<std::size_t>(n), 0.0);
  std::vector<std::array<double, 2>> q(static_cast<std::size_t>(n - 1));
  for (int it = 0; it < 100000; ++it) {
    double change = 0.0;
    for (int s = 0; s < n - 1; ++s) {
      for (int a = 0; a < 2; ++a) {
        const auto o = env.transition(s, a);
        q[s][a] = o.reward + (o.terminal ? 0.0 : gamma * v[o.next]);
      }
      const double nv = std::max(q[s][0], q[s][1]);
      change = std::max(change, std::abs(nv - v[s]));
      v[s] = nv;
    }
    if (change < tol) return q;
  }
  throw TrainingError("value iteration did not converge");
}

}  // namespace semrl::agents
