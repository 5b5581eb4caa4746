#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "semrl/harness/spec.hpp"
#include "semrl/observe/observe.hpp"

namespace semrl::harness {

struct DescribeRequest {
  std::string scenario = "DefendLine";
  std::uint64_t seed = 0;
  int tick = 0;
  langgen::PatchGrid grid;
  std::optional<int> variant;
  // RawFrame written here as PPM when non-empty.
  std::filesystem::path frame_path;
};

struct DescribeResult {
  world::WorldState state;
  std::string sentence;
  std::vector<int> variants;  // status clause, then one per patch
  std::vector<int> token_ids;
  std::array<int, observe::kSegChannels> seg_sums{};
  std::filesystem::path frame_path;
};

// Plays a no-op episode up to `tick` and renders that state every way.
DescribeResult describe_state(const DescribeRequest& req, const langgen::TemplateBank& bank,
                              const langgen::Vocabulary& vocab);
void print_description(std::ostream& out, const DescribeResult& r, bool show_variants);

struct EvalResult {
  int episodes = 0;
  double mean_reward = 0.0;
  double std_reward = 0.0;
  double expert_reward = 0.0;
};

// Rolls out a saved model: greedy for DQN, sampled for PPO.
EvalResult evaluate_checkpoint(const RunSettings& settings, const std::filesystem::path& checkpoint, int episodes,
                               const langgen::TemplateBank& bank, const langgen::Vocabulary& vocab);

}  // namespace semrl::harness
