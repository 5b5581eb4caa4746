#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "semrl/world/arena.hpp"

namespace semrl::world {

struct TraceRecord {
  int tick = 0;
  Action action = Action::kNoop;
  double reward = 0.0;
  double health = 0.0;
  int entity_count = 0;

  bool operator==(const TraceRecord&) const = default;
};

using Policy = std::function<Action(const WorldState&)>;

// One record per step of a full episode.
std::vector<TraceRecord> record_trace(const Arena& arena, std::uint64_t seed, const Policy& policy);

// JSONL, one {tick, action, reward, health, entity_count} object per line.
void write_jsonl(std::ostream& out, const std::vector<TraceRecord>& trace);
std::vector<TraceRecord> read_jsonl(std::istream& in);

}  // namespace semrl::world
