#include "semrl/world/trace.hpp"

#include <istream>
#include <ostream>

#include "json.hpp"
#include "semrl/core/error.hpp"

namespace semrl::world {

std::vector<TraceRecord> record_trace(const Arena& arena, std::uint64_t seed, const Policy& policy) {
  std::vector<TraceRecord> trace;
  auto state = arena.reset(seed);
  while (!state.terminal) {
    const Action a = policy(state);
    const int tick = state.tick;
    auto r = arena.step(state, a);
    state = std::move(r.state);
    trace.push_back(TraceRecord{tick, a, r.reward, state.health(), static_cast<int>(state.entities.size())});
  }
  return trace;
}

void write_jsonl(std::ostream& out, const std::vector<TraceRecord>& trace) {
  for (const auto& r : trace) {
    nlohmann::ordered_json j;
    j["tick"] = r.tick;
    j["action"] = std::string(to_string(r.action));
    j["reward"] = r.reward;
    j["health"] = r.health;
    j["entity_count"] = r.entity_count;
    out << j.dump() << '\n';
  }
}

std::vector<TraceRecord> read_jsonl(std::istream& in) {
  std::vector<TraceRecord> trace;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded()) throw CorruptionError("trace: malformed JSON line");
    TraceRecord r;
    r.tick = j.at("tick").get<int>();
    const auto name = j.at("action").get<std::string>();
    bool found = false;
    for (int a = 0; a < kNumActions; ++a) {
      if (to_string(static_cast<Action>(a)) == name) {
        r.action = static_cast<Action>(a);
        found = true;
      }
    }
    if (!found) throw CorruptionError("trace: unknown action '" + name + "'");
    r.reward = j.at("reward").get<double>();
    r.health = j.at("health").get<double>();
    r.entity_count = j.at("entity_count").get<int>();
    trace.push_back(r);
  }
  return trace;
}

}  // namespace semrl::world
