#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

#include "semrl/agents/dqn.hpp"
#include "semrl/agents/ppo.hpp"

namespace semrl::agents {

inline constexpr int kMovingWindow = 100;

struct CurveRow {
  std::int64_t step = 0;  // environment steps when the episode ended
  std::int64_t episode = 0;
  double reward = 0.0;
  double moving_avg = 0.0;  // over the last kMovingWindow episodes
  double aux = 0.0;         // epsilon (DQN) or last clip fraction (PPO)
};

struct TrainOptions {
  std::int64_t total_steps = 0;
  std::uint64_t seed = 0;
  // Stop once the moving average over a full window reaches this value.
  double stop_reward = std::numeric_limits<double>::quiet_NaN();
  // Final parameters are written here when non-empty; a diverged run writes
  // its last parameters to <checkpoint>.diverged instead.
  std::filesystem::path checkpoint;
  std::uint64_t vocab_hash = 0;
};

struct TrainResult {
  std::vector<CurveRow> curve;
  std::int64_t steps = 0;
  std::int64_t updates = 0;
  bool diverged = false;
  bool stopped_early = false;
  std::string failure;
};

// Episode k of a run resets the environment with this seed.
std::uint64_t episode_seed(std::uint64_t run_seed, std::int64_t episode);

TrainResult train_dqn(DqnAgent& agent, Environment& env, const TrainOptions& opt);
TrainResult train_ppo(PpoAgent& agent, Environment& env, const TrainOptions& opt);

// Mean reward of the last `window` episodes (all if fewer).
double tail_mean(const std::vector<CurveRow>& curve, int window = kMovingWindow);

void write_curve_csv(std::ostream& out, const std::vector<CurveRow>& curve);
void write_curve_csv(const std::filesystem::path& path, const std::vector<CurveRow>& curve);
std::vector<CurveRow> read_curve_csv(const std::filesystem::path& path);

}  // namespace semrl::agents
