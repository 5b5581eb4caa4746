#include "semrl/langgen/measure.hpp"

#include <algorithm>

namespace semrl::langgen {

LengthStats measure_length(const world::ArenaConfig& config, const PatchGrid& grid, const TemplateBank& bank,
                           int episodes, std::uint64_t seed, RolloutPolicy policy) {
  world::Arena arena(config);
  auto ambiguity = rng::make_engine(seed, rng::Stream::kAmbiguity);
  auto explore = rng::make_engine(seed, rng::Stream::kExploration);
  LengthStats stats;
  double total = 0.0;
  for (int ep = 0; ep < episodes; ++ep) {
    auto state = arena.reset(rng::derive(seed, static_cast<std::uint64_t>(ep) + 1000));
    while (true) {
      const auto words = describe(summarize(observe::extract_objects(state), grid), grid, bank, ambiguity).words;
      total += static_cast<double>(words.size());
      stats.max_words = std::max(stats.max_words, static_cast<int>(words.size()));
      ++stats.states;
      if (state.terminal) break;
      world::Action a = world::Action::kNoop;
      if (policy == RolloutPolicy::kRandom) a = static_cast<world::Action>(rng::below(explore, world::kNumActions));
      if (policy == RolloutPolicy::kExpert) a = world::scripted_expert(state, config);
      state = arena.step(state, a).state;
    }
  }
  stats.mean_words = stats.states > 0 ? total / static_cast<double>(stats.states) : 0.0;
  return stats;
}

}  // namespace semrl::langgen
