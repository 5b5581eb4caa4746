#pragma once

#include <cstdint>

#include "semrl/langgen/generator.hpp"
#include "semrl/world/arena.hpp"

namespace semrl::langgen {

struct LengthStats {
  double mean_words = 0.0;
  int max_words = 0;
  long states = 0;
};

enum class RolloutPolicy { kNoop, kRandom, kExpert };

// Words per state over `episodes` full episodes of the scenario.
LengthStats measure_length(const world::ArenaConfig& config, const PatchGrid& grid, const TemplateBank& bank,
                           int episodes, std::uint64_t seed, RolloutPolicy policy = RolloutPolicy::kRandom);

}  // namespace semrl::langgen
