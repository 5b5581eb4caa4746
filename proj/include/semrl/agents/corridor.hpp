#pragma once

#include <array>
#include <vector>

#include "semrl/agents/env.hpp"
#include "semrl/core/rng.hpp"

namespace semrl::agents {

// Deterministic chain: states 0..n-1, actions 0 = left, 1 = right. Entering
// the last state pays 1 and ends the episode; left at state 0 stays put.
// Episodes start in a uniformly drawn non-goal state and are cut off after
// `max_steps` steps. Observations are one-hot state vectors.
class CorridorEnv : public Environment {
 public:
  explicit CorridorEnv(int n = 5, int max_steps = 50);

  struct Outcome {
    int next = 0;
    double reward = 0.0;
    bool terminal = false;
  };
  Outcome transition(int s, int action) const;

  const ObsSpec& spec() const override { return spec_; }
  int num_actions() const override { return 2; }
  Observation reset(std::uint64_t seed) override;
  EnvStep step(int action) override;

  int states() const { return n_; }
  int goal() const { return n_ - 1; }
  int position() const { return s_; }
  Observation encode(int s) const;

 private:
  int n_, max_steps_;
  ObsSpec spec_;
  int s_ = 0, t_ = 0;
};

// Optimal action values of the non-goal states by value iteration to a fixed
// point (sup-norm change below tol).
std::vector<std::array<double, 2>> corridor_q_star(const CorridorEnv& env, double gamma, double tol = 1e-13);

}  // namespace semrl::agents
