#pragma once

#include <cstdint>
#include <string_view>

#include "semrl/agents/env.hpp"
#include "semrl/langgen/generator.hpp"
#include "semrl/world/arena.hpp"

namespace semrl::agents {

enum class Representation { kRaw, kSeg, kNL };

std::string_view to_string(Representation r);
Representation parse_representation(std::string_view name);

struct ArenaEnvConfig {
  world::ArenaConfig arena;
  Representation representation = Representation::kNL;
  langgen::PatchGrid grid;
  // 0 sizes L_max to the no-truncation bound for the grid.
  int token_length = 0;
  // Seeds the ambiguity (variant choice) and texture streams.
  std::uint64_t seed = 0;
};

// The arena seen through one representation. Time-limit endings are reported
// as truncations, deaths as terminals.
class ArenaEnv : public Environment {
 public:
  ArenaEnv(const ArenaEnvConfig& cfg, langgen::TemplateBank bank, langgen::Vocabulary vocab);

  const ObsSpec& spec() const override { return spec_; }
  int num_actions() const override { return world::kNumActions; }
  Observation reset(std::uint64_t seed) override;
  EnvStep step(int action) override;

  const world::WorldState& state() const { return state_; }
  const ArenaEnvConfig& config() const { return cfg_; }
  const langgen::Vocabulary& vocabulary() const { return vocab_; }
  // Sentence statistics over every NL observation emitted so far.
  std::int64_t sentences() const { return sentences_; }
  std::int64_t words() const { return words_; }
  std::int64_t truncations() const { return truncations_; }

 private:
  Observation observe();

  ArenaEnvConfig cfg_;
  world::Arena arena_;
  langgen::TemplateBank bank_;
  langgen::Vocabulary vocab_;
  ObsSpec spec_;
  world::WorldState state_;
  rng::Engine ambiguity_;
  std::uint64_t texture_master_;
  std::uint64_t frames_ = 0;
  std::int64_t sentences_ = 0, words_ = 0, truncations_ = 0;
};

}  // namespace semrl::agents
