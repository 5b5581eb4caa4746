#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "doctest.h"
#include "semrl/core/error.hpp"
#include "semrl/world/arena.hpp"
#include "semrl/world/trace.hpp"

using namespace semrl;
using namespace semrl::world;

namespace {

std::vector<Action> random_actions(std::uint64_t seed, int n) {
  auto eng = rng::make_engine(seed, rng::Stream::kExploration);
  std::vector<Action> out;
  for (int i = 0; i < n; ++i) out.push_back(static_cast<Action>(rng::below(eng, kNumActions)));
  return out;
}

}  // namespace

TEST_CASE("reset places the agent and vitals") {
  Arena arena(preset("DefendLine"));
  auto s = arena.reset(7);
  CHECK(s.agent_col == 10);
  CHECK(s.agent_row == 14);
  CHECK(s.health() == 100.0);
  CHECK(s.tick == 0);
  CHECK(s.ammo == 50);
  CHECK(s.entities.empty());

  Arena center(preset("DefendCenter"));
  CHECK(center.reset(7).agent_row == 7);
}

TEST_CASE("reset spawns distinct nuisances") {
  auto cfg = preset("Super");
  cfg.nuisance_count = 60;
  Arena arena(cfg);
  auto s = arena.reset(1);
  CHECK(s.count(EntityClass::kNuisance) == 60);
  std::set<std::pair<int, int>> cells;
  for (const auto& e : s.entities) {
    cells.insert({e.col, e.row});
    CHECK(e.row != s.agent_row);
  }
  CHECK(cells.size() == 60);
}

TEST_CASE("reset is deterministic") {
  auto cfg = preset("Super");
  Arena arena(cfg);
  CHECK(arena.reset(42) == arena.reset(42));
  CHECK_FALSE(arena.reset(42) == arena.reset(43));
}

TEST_CASE("invalid configs are rejected") {
  auto cfg = preset("DefendLine");
  cfg.width = 20;
  CHECK_THROWS_AS(Arena{cfg}, ConfigError);
  cfg = preset("DefendLine");
  cfg.nuisance_count = 5;
  CHECK_THROWS_AS(Arena{cfg}, ConfigError);
  cfg.nuisance_enabled = true;
  CHECK_NOTHROW(Arena{cfg});
  CHECK_THROWS_AS(preset("Nope"), ConfigError);
}

TEST_CASE("shooting kills the nearest enemy in the column") {
  auto cfg = preset("DefendLine");
  cfg.enemy_spawn_period = 1000;
  Arena arena(cfg);
  auto s = arena.reset(3);
  s.tick = 1;  // keep clear of the spawn tick
  s.ammo = 3;
  s.entities.push_back(Entity{100, EntityClass::kEnemy, s.agent_col, 2, true});
  s.entities.push_back(Entity{101, EntityClass::kEnemy, s.agent_col, 5, true});
  auto r = arena.step(s, Action::kShoot);
  CHECK(r.reward == 1.0);
  CHECK(r.state.ammo == 2);
  REQUIRE(r.state.entities.size() == 1);
  CHECK(r.state.entities[0].id == 100);

  // No enemy in the column: ammo still spent.
  auto miss = s;
  miss.entities = {Entity{100, EntityClass::kEnemy, 0, 2, true}};
  auto r2 = arena.step(miss, Action::kShoot);
  CHECK(r2.reward == 0.0);
  CHECK(r2.state.ammo == 2);

  auto empty = s;
  empty.ammo = 0;
  auto r3 = arena.step(empty, Action::kShoot);
  CHECK(r3.reward == 0.0);
  CHECK(r3.state.entities.size() == 2);
}

TEST_CASE("movement saturates at the walls") {
  Arena arena(preset("DefendLine-mini"));
  auto s = arena.reset(0);
  s.agent_col = 0;
  CHECK(arena.step(s, Action::kMoveLeft).state.agent_col == 0);
  s.agent_col = s.width - 1;
  CHECK(arena.step(s, Action::kMoveRight).state.agent_col == s.width - 1);
}

TEST_CASE("Super health degenerates half a point per tick") {
  auto cfg = preset("Super");
  cfg.max_enemies = 0;
  cfg.max_items = 0;
  cfg.nuisance_count = 0;
  Arena arena(cfg);
  auto s = arena.reset(5);
  for (int i = 0; i < 40; ++i) s = arena.step(s, Action::kNoop).state;
  CHECK(s.health() == 80.0);
  CHECK(s.tick == 40);
}

TEST_CASE("collisions apply damage and pickups") {
  auto cfg = preset("Super");
  cfg.max_enemies = 0;
  cfg.max_items = 0;
  cfg.nuisance_count = 0;
  Arena arena(cfg);
  auto s = arena.reset(5);
  s.tick = 2;
  s.health_halves = 100;
  const int ar = s.agent_row, ac = s.agent_col;
  s.entities = {
      Entity{1, EntityClass::kFireball, ac, ar - 1, true},
      Entity{2, EntityClass::kFireball, ac + 3, ar - 1, true},
      Entity{3, EntityClass::kMedipack, ac, ar, true},
      Entity{4, EntityClass::kAmmo, ac + 2, ar, true},
  };
  auto r = arena.step(s, Action::kNoop);
  // -15 fireball, +25 medipack, -0.5 degeneration
  CHECK(r.state.health() == 50.0 - 15.0 + 25.0 - 0.5);
  REQUIRE(r.state.entities.size() == 1);
  CHECK(r.state.entities[0].id == 4);
  CHECK(r.state.ammo == s.ammo);

  s.entities = {Entity{5, EntityClass::kEnemy, ac + 1, ar, true}};
  r = arena.step(s, Action::kNoop);
  CHECK(r.state.health() == 50.0 - 20.0 - 0.5);
  CHECK(r.state.entities.empty());
}

TEST_CASE("terminal states cannot be stepped") {
  auto cfg = preset("DefendLine-mini");
  cfg.max_ticks = 3;
  Arena arena(cfg);
  auto s = arena.reset(1);
  for (int i = 0; i < 3; ++i) {
    auto r = arena.step(s, Action::kNoop);
    CHECK(r.terminal == (i == 2));
    s = r.state;
  }
  CHECK_THROWS_AS(arena.step(s, Action::kNoop), UsageError);

  auto dead = arena.reset(1);
  dead.health_halves = 0;
  dead.terminal = true;
  CHECK_THROWS_AS(arena.step(dead, Action::kNoop), UsageError);
}

TEST_CASE("invariants hold along random episodes") {
  for (const char* name : {"DefendLine", "DefendCenter", "Super", "Super-mini"}) {
    Arena arena(preset(name));
    auto s = arena.reset(11);
    auto actions = random_actions(11, 2000);
    for (Action a : actions) {
      if (s.terminal) break;
      s = arena.step(s, a).state;
      CHECK(s.health_halves >= 0);
      CHECK(s.health_halves <= kMaxHealthHalves);
      std::set<std::uint32_t> ids;
      for (const auto& e : s.entities) {
        CHECK(e.alive);
        CHECK(e.col >= 0);
        CHECK(e.col < s.width);
        CHECK(e.row >= 0);
        CHECK(e.row < s.height);
        ids.insert(e.id);
      }
      CHECK(ids.size() == s.entities.size());
    }
  }
}

TEST_CASE("enemy conservation: removals are kills or collisions") {
  Arena arena(preset("DefendLine-mini"));
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    auto s = arena.reset(seed);
    for (Action a : random_actions(seed + 100, 400)) {
      if (s.terminal) break;
      auto r = arena.step(s, a);
      std::set<std::uint32_t> before, after;
      for (const auto& e : s.entities) before.insert(e.id);
      for (const auto& e : r.state.entities) after.insert(e.id);
      int removed = 0, spawned = 0;
      for (auto id : before) removed += after.count(id) == 0;
      for (auto id : after) {
        if (before.count(id) == 0) {
          ++spawned;
          CHECK(id >= s.next_id);
        }
      }
      CHECK(spawned <= 1);
      const int collisions = (s.health_halves - r.state.health_halves) / kEnemyDamageHalves;
      if (r.state.health_halves > 0) CHECK(removed == static_cast<int>(r.reward) + collisions);
      s = r.state;
    }
  }
}

TEST_CASE("nuisances never change rewards or vitals") {
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    auto with = preset("Super-mini");
    with.nuisance_count = 40;
    auto without = with;
    without.nuisance_count = 0;
    Arena a(with), b(without);
    auto sa = a.reset(seed), sb = b.reset(seed);
    for (Action act : random_actions(seed, 300)) {
      if (sa.terminal) break;
      auto ra = a.step(sa, act), rb = b.step(sb, act);
      CHECK(ra.reward == rb.reward);
      CHECK(ra.state.health_halves == rb.state.health_halves);
      CHECK(ra.state.ammo == rb.state.ammo);
      CHECK(ra.terminal == rb.terminal);
      sa = ra.state;
      sb = rb.state;
    }
  }
}

TEST_CASE("scripted expert earns reward and beats a random policy") {
  auto cfg = preset("DefendLine-mini");
  Arena arena(cfg);
  double expert = 0.0, random = 0.0;
  auto eng = rng::make_engine(9, rng::Stream::kExploration);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    for (const auto& r : record_trace(arena, seed, [&](const WorldState& s) { return scripted_expert(s, cfg); })) {
      expert += r.reward;
    }
    for (const auto& r : record_trace(arena, seed, [&](const WorldState&) {
           return static_cast<Action>(rng::below(eng, kNumActions));
         })) {
      random += r.reward;
    }
  }
  CHECK(expert / 20 >= 12.0);
  CHECK(expert > 2 * random);
}

TEST_CASE("golden trace replays identically") {
  auto cfg = preset("Super-mini");
  Arena arena(cfg);
  auto trace = record_trace(arena, 2024, [&](const WorldState& s) { return scripted_expert(s, cfg); });
  CHECK(trace == record_trace(arena, 2024, [&](const WorldState& s) { return scripted_expert(s, cfg); }));

  const std::string path = std::string(SEMRL_TEST_DATA_DIR) + "/golden_super_mini_expert.jsonl";
  if (std::getenv("SEMRL_UPDATE_GOLDEN") != nullptr) {
    std::ofstream out(path);
    write_jsonl(out, trace);
  }
  std::ifstream in(path);
  REQUIRE(in.good());
  const auto golden = read_jsonl(in);
  CHECK(golden.size() == trace.size());
  CHECK(golden == trace);

  std::stringstream ss;
  write_jsonl(ss, trace);
  CHECK(read_jsonl(ss) == trace);
}

TEST_CASE("arena config round-trips through key=value") {
  auto cfg = preset("Super-mini");
  KvConfig kv;
  cfg.to_kv(kv);
  auto back = ArenaConfig::from_kv(KvConfig::parse(kv.to_string()));
  CHECK(back.width == cfg.width);
  CHECK(back.scenario == cfg.scenario);
  CHECK(back.nuisance_count == cfg.nuisance_count);
  CHECK(back.item_spawn_period == cfg.item_spawn_period);
  CHECK_THROWS_AS(KvConfig::parse("width 9"), ConfigError);
  CHECK_THROWS_AS(ArenaConfig::from_kv(KvConfig::parse("width=abc")), ConfigError);
}
