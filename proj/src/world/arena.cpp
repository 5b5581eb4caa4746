#include "semrl/world/arena.hpp"

#include <algorithm>
#include <cstdlib>
#include <limits>

#include "semrl/core/error.hpp"

namespace semrl::world {

std::string_view to_string(Scenario s) {
  switch (s) {
    case Scenario::kDefendLine: return "DefendLine";
    case Scenario::kDefendCenter: return "DefendCenter";
    case Scenario::kSuper: return "Super";
  }
  return "?";
}

std::string_view to_string(EntityClass c) {
  switch (c) {
    case EntityClass::kEnemy: return "Enemy";
    case EntityClass::kFireball: return "Fireball";
    case EntityClass::kMedipack: return "Medipack";
    case EntityClass::kAmmo: return "Ammo";
    case EntityClass::kNuisance: return "Nuisance";
  }
  return "?";
}

std::string_view to_string(Action a) {
  switch (a) {
    case Action::kNoop: return "Noop";
    case Action::kMoveLeft: return "MoveLeft";
    case Action::kMoveRight: return "MoveRight";
    case Action::kShoot: return "Shoot";
  }
  return "?";
}

Scenario parse_scenario(std::string_view name) {
  if (name == "DefendLine") return Scenario::kDefendLine;
  if (name == "DefendCenter") return Scenario::kDefendCenter;
  if (name == "Super") return Scenario::kSuper;
  throw ConfigError("unknown scenario '" + std::string(name) + "'");
}

int ArenaConfig::starting_ammo() const {
  if (initial_ammo >= 0) return initial_ammo;
  switch (scenario) {
    case Scenario::kDefendLine: return 50;
    case Scenario::kDefendCenter: return 30;
    case Scenario::kSuper: return 15;
  }
  return 0;
}

int ArenaConfig::agent_row() const {
  return scenario == Scenario::kDefendCenter ? height / 2 : height - 1;
}

void ArenaConfig::validate() const {
  auto fail = [](const std::string& msg) { throw ConfigError("arena config: " + msg); };
  if (width < 3 || height < 3) fail("width and height must be >= 3");
  if (width > 99 || height > 99) fail("width and height must be <= 99");
  if (width % 2 == 0 || height % 2 == 0) fail("width and height must be odd");
  if (max_ticks < 1) fail("max_ticks must be >= 1");
  if (nuisance_count < 0) fail("nuisance_count must be >= 0");
  if (nuisance_count > 0 && !nuisance_allowed()) {
    fail("nuisance_count > 0 requires scenario Super or nuisance_enabled");
  }
  if (nuisance_count > width * (height - 1)) fail("nuisance_count exceeds free cells");
  if (enemy_spawn_period < 1 || enemy_fire_period < 1 || item_spawn_period < 1) {
    fail("spawn and fire periods must be >= 1");
  }
  if (max_enemies < 0 || max_items < 0) fail("max_enemies and max_items must be >= 0");
  if (scenario == Scenario::kDefendCenter && agent_row() < 2) fail("arena too short");
}

ArenaConfig ArenaConfig::from_kv(const KvConfig& kv) { return from_kv(kv, ArenaConfig{}); }

ArenaConfig ArenaConfig::from_kv(const KvConfig& kv, ArenaConfig base) {
  ArenaConfig c = base;
  if (auto name = kv.get("scenario")) c.scenario = parse_scenario(*name);
  c.width = static_cast<int>(kv.get_int("width", c.width));
  c.height = static_cast<int>(kv.get_int("height", c.height));
  c.max_ticks = static_cast<int>(kv.get_int("max_ticks", c.max_ticks));
  c.nuisance_count = static_cast<int>(kv.get_int("nuisance_count", c.nuisance_count));
  c.nuisance_enabled = kv.get_bool("nuisance_enabled", c.nuisance_enabled);
  c.enemy_spawn_period = static_cast<int>(kv.get_int("enemy_spawn_period", c.enemy_spawn_period));
  c.enemy_fire_period = static_cast<int>(kv.get_int("enemy_fire_period", c.enemy_fire_period));
  c.item_spawn_period = static_cast<int>(kv.get_int("item_spawn_period", c.item_spawn_period));
  c.max_enemies = static_cast<int>(kv.get_int("max_enemies", c.max_enemies));
  c.max_items = static_cast<int>(kv.get_int("max_items", c.max_items));
  c.initial_ammo = static_cast<int>(kv.get_int("initial_ammo", c.initial_ammo));
  c.rng_seed = static_cast<std::uint64_t>(kv.get_int("rng_seed", static_cast<std::int64_t>(c.rng_seed)));
  return c;
}

void ArenaConfig::to_kv(KvConfig& kv) const {
  kv.set("scenario", std::string(to_string(scenario)));
  kv.set("width", std::to_string(width));
  kv.set("height", std::to_string(height));
  kv.set("max_ticks", std::to_string(max_ticks));
  kv.set("nuisance_count", std::to_string(nuisance_count));
  kv.set("nuisance_enabled", nuisance_enabled ? "true" : "false");
  kv.set("enemy_spawn_period", std::to_string(enemy_spawn_period));
  kv.set("enemy_fire_period", std::to_string(enemy_fire_period));
  kv.set("item_spawn_period", std::to_string(item_spawn_period));
  kv.set("max_enemies", std::to_string(max_enemies));
  kv.set("max_items", std::to_string(max_items));
  kv.set("initial_ammo", std::to_string(initial_ammo));
  kv.set("rng_seed", std::to_string(rng_seed));
}

ArenaConfig preset(std::string_view name) {
  ArenaConfig c;
  if (name == "DefendLine") {
    c.scenario = Scenario::kDefendLine;
  } else if (name == "DefendCenter") {
    c.scenario = Scenario::kDefendCenter;
    c.enemy_spawn_period = 12;
    c.max_enemies = 4;
  } else if (name == "Super") {
    c.scenario = Scenario::kSuper;
    c.nuisance_count = 20;
  } else if (name == "DefendLine-mini") {
    c.scenario = Scenario::kDefendLine;
    c.width = 9;
    c.height = 7;
    c.max_ticks = 100;
    c.enemy_spawn_period = 6;
    c.max_enemies = 4;
    c.initial_ammo = 40;
  } else if (name == "DefendCenter-mini") {
    c.scenario = Scenario::kDefendCenter;
    c.width = 9;
    c.height = 7;
    c.max_ticks = 100;
    c.enemy_spawn_period = 10;
    c.enemy_fire_period = 5;
    c.max_enemies = 3;
    c.initial_ammo = 30;
  } else if (name == "Super-mini") {
    c.scenario = Scenario::kSuper;
    c.width = 9;
    c.height = 7;
    c.max_ticks = 150;
    c.enemy_spawn_period = 8;
    c.enemy_fire_period = 6;
    c.item_spawn_period = 8;
    c.max_enemies = 3;
    c.max_items = 4;
    c.initial_ammo = 10;
    c.nuisance_count = 12;
  } else if (name == "Super-crowded") {
    // Full-size super scenario packed with enemies, items and clutter.
    c.scenario = Scenario::kSuper;
    c.nuisance_count = 120;
    c.enemy_spawn_period = 1;
    c.enemy_fire_period = 3;
    c.item_spawn_period = 1;
    c.max_enemies = 20;
    c.max_items = 12;
  } else {
    throw ConfigError("unknown scenario preset '" + std::string(name) + "'");
  }
  return c;
}

int WorldState::count(EntityClass c) const {
  return static_cast<int>(std::count_if(entities.begin(), entities.end(), [c](const Entity& e) {
    return e.alive && e.cls == c;
  }));
}

Arena::Arena(ArenaConfig config) : config_(config) { config_.validate(); }

WorldState Arena::reset(std::uint64_t seed) const {
  WorldState s;
  s.width = config_.width;
  s.height = config_.height;
  s.agent_row = config_.agent_row();
  s.agent_col = config_.width / 2;
  s.health_halves = kMaxHealthHalves;
  s.ammo = config_.starting_ammo();
  s.rng = rng::make_engine(seed, rng::Stream::kDynamics);

  if (config_.nuisance_count > 0) {
    // Partial Fisher-Yates over every cell off the agent row.
    auto nrng = rng::make_engine(seed, rng::Stream::kNuisance);
    std::vector<int> cells;
    cells.reserve(static_cast<std::size_t>(config_.width * config_.height));
    for (int r = 0; r < config_.height; ++r) {
      if (r == s.agent_row) continue;
      for (int c = 0; c < config_.width; ++c) cells.push_back(r * config_.width + c);
    }
    for (int i = 0; i < config_.nuisance_count; ++i) {
      const int j = i + rng::below(nrng, static_cast<int>(cells.size()) - i);
      std::swap(cells[static_cast<std::size_t>(i)], cells[static_cast<std::size_t>(j)]);
      const int cell = cells[static_cast<std::size_t>(i)];
      s.entities.push_back(Entity{kNuisanceIdBase + static_cast<std::uint32_t>(i),
                                  EntityClass::kNuisance, cell % config_.width,
                                  cell / config_.width, true});
    }
  }
  return s;
}

namespace {

int toward(int from, int to) { return from < to ? 1 : (from > to ? -1 : 0); }

bool occupied(const WorldState& s, EntityClass cls, int col, int row) {
  return std::any_of(s.entities.begin(), s.entities.end(), [&](const Entity& e) {
    return e.alive && e.cls == cls && e.col == col && e.row == row;
  });
}

}  // namespace

StepResult Arena::step(const WorldState& state, Action action) const {
  if (state.terminal) throw UsageError("step() called on a terminal WorldState");

  StepResult out{state, 0.0, false};
  WorldState& s = out.state;
  const int ar = s.agent_row;

  // (1) action
  switch (action) {
    case Action::kNoop: break;
    case Action::kMoveLeft:
      if (s.agent_col > 0) --s.agent_col;
      break;
    case Action::kMoveRight:
      if (s.agent_col < s.width - 1) ++s.agent_col;
      break;
    case Action::kShoot: {
      if (s.ammo <= 0) break;
      --s.ammo;
      Entity* target = nullptr;
      for (auto& e : s.entities) {
        if (!e.alive || e.cls != EntityClass::kEnemy || e.col != s.agent_col) continue;
        if (target == nullptr || std::abs(ar - e.row) < std::abs(ar - target->row) ||
            (std::abs(ar - e.row) == std::abs(ar - target->row) && e.id < target->id)) {
          target = &e;
        }
      }
      if (target != nullptr) {
        target->alive = false;
        out.reward += 1.0;
      }
      break;
    }
  }

  // (2) dynamics
  for (auto& e : s.entities) {
    if (e.alive && e.cls == EntityClass::kFireball) e.row += toward(e.row, ar);
  }
  const bool enemies_walk = config_.scenario != Scenario::kDefendCenter && s.tick % 2 == 1;
  if (enemies_walk) {
    for (auto& e : s.entities) {
      if (!e.alive || e.cls != EntityClass::kEnemy) continue;
      int col = e.col, row = e.row;
      if (row != ar) {
        row += toward(row, ar);
      } else {
        // Enemies that reach the line charge along it.
        col += toward(col, s.agent_col);
      }
      // Enemies never stack; a blocked enemy waits.
      if (!occupied(s, EntityClass::kEnemy, col, row)) {
        e.col = col;
        e.row = row;
      }
    }
  }
  const bool enemies_fire =
      config_.scenario != Scenario::kDefendLine && s.tick % config_.enemy_fire_period == 0;
  if (enemies_fire) {
    const std::size_t n = s.entities.size();
    for (std::size_t i = 0; i < n; ++i) {
      const Entity e = s.entities[i];
      if (!e.alive || e.cls != EntityClass::kEnemy || e.row == ar) continue;
      const int row = e.row + toward(e.row, ar);
      if (occupied(s, EntityClass::kFireball, e.col, row)) continue;
      s.entities.push_back(Entity{s.next_id++, EntityClass::kFireball, e.col, row, true});
    }
  }

  // (3) collisions
  for (auto& e : s.entities) {
    if (!e.alive || e.row != ar) continue;
    switch (e.cls) {
      case EntityClass::kEnemy:
        if (std::abs(e.col - s.agent_col) <= 1) {
          s.health_halves -= kEnemyDamageHalves;
          e.alive = false;
        }
        break;
      case EntityClass::kFireball:
        if (e.col == s.agent_col) s.health_halves -= kFireballDamageHalves;
        e.alive = false;
        break;
      case EntityClass::kMedipack:
        if (e.col == s.agent_col) {
          s.health_halves = std::min(kMaxHealthHalves, s.health_halves + kMedipackHealHalves);
          e.alive = false;
        }
        break;
      case EntityClass::kAmmo:
        if (e.col == s.agent_col) {
          s.ammo += kAmmoPickup;
          e.alive = false;
        }
        break;
      case EntityClass::kNuisance: break;
    }
  }

  // (4) degeneration
  if (config_.scenario == Scenario::kSuper) s.health_halves -= kDegenerationHalves;
  s.health_halves = std::max(0, s.health_halves);

  std::erase_if(s.entities, [](const Entity& e) { return !e.alive; });

  // (5) spawns
  spawn(s);

  // (6) clock
  ++s.tick;
  s.cumulative_reward += out.reward;
  s.terminal = s.health_halves == 0 || s.tick >= config_.max_ticks;
  out.terminal = s.terminal;
  return out;
}

void Arena::spawn(WorldState& s) const {
  if (s.tick % config_.enemy_spawn_period == 0) {
    int row = 0;
    if (config_.scenario == Scenario::kDefendCenter) {
      row = rng::below(s.rng, s.agent_row - 1);
    }
    const int col = rng::below(s.rng, s.width);
    if (s.count(EntityClass::kEnemy) < config_.max_enemies &&
        !occupied(s, EntityClass::kEnemy, col, row)) {
      s.entities.push_back(Entity{s.next_id++, EntityClass::kEnemy, col, row, true});
    }
  }
  if (config_.scenario == Scenario::kSuper && s.tick % config_.item_spawn_period == 0) {
    const auto cls = rng::below(s.rng, 2) == 0 ? EntityClass::kMedipack : EntityClass::kAmmo;
    const int col = rng::below(s.rng, s.width);
    const int items = s.count(EntityClass::kMedipack) + s.count(EntityClass::kAmmo);
    if (items < config_.max_items && col != s.agent_col &&
        !occupied(s, EntityClass::kMedipack, col, s.agent_row) &&
        !occupied(s, EntityClass::kAmmo, col, s.agent_row)) {
      s.entities.push_back(Entity{s.next_id++, cls, col, s.agent_row, true});
    }
  }
}

namespace {

// A column is unsafe if standing there at the end of the next tick costs health.
bool column_unsafe(const WorldState& s, int col) {
  const int ar = s.agent_row;
  for (const auto& e : s.entities) {
    if (e.cls == EntityClass::kFireball && e.col == col && std::abs(e.row - ar) == 1) return true;
    if (e.cls == EntityClass::kEnemy) {
      if (e.row == ar && std::abs(e.col - col) <= 2) return true;
      if (std::abs(e.row - ar) == 1 && std::abs(e.col - col) <= 1 && s.tick % 2 == 1) return true;
    }
  }
  return false;
}

Action move_toward(const WorldState& s, int col) {
  if (col < s.agent_col) return Action::kMoveLeft;
  if (col > s.agent_col) return Action::kMoveRight;
  return Action::kNoop;
}

}  // namespace

Action scripted_expert(const WorldState& s, const ArenaConfig& config) {
  const int ar = s.agent_row;

  // Shootable enemy closest to the agent row; ties go to the nearer column.
  const Entity* target = nullptr;
  for (const auto& e : s.entities) {
    if (e.cls != EntityClass::kEnemy || e.row == ar) continue;
    if (target == nullptr) {
      target = &e;
      continue;
    }
    const int de = std::abs(ar - e.row), dt = std::abs(ar - target->row);
    if (de < dt || (de == dt && std::abs(e.col - s.agent_col) < std::abs(target->col - s.agent_col))) {
      target = &e;
    }
  }

  if (s.ammo > 0 && target != nullptr && target->col == s.agent_col &&
      !column_unsafe(s, s.agent_col)) {
    return Action::kShoot;
  }

  int goal = s.agent_col;
  if (config.scenario == Scenario::kSuper) {
    const bool want_health = s.health_halves < 120;
    const bool want_ammo = s.ammo < 3;
    int best = std::numeric_limits<int>::max();
    for (const auto& e : s.entities) {
      const bool useful = (e.cls == EntityClass::kMedipack && want_health) ||
                          (e.cls == EntityClass::kAmmo && want_ammo);
      if (useful && std::abs(e.col - s.agent_col) < best) {
        best = std::abs(e.col - s.agent_col);
        goal = e.col;
      }
    }
    if (best == std::numeric_limits<int>::max() && s.ammo > 0 && target != nullptr) goal = target->col;
  } else if (s.ammo > 0 && target != nullptr) {
    goal = target->col;
  }

  Action a = move_toward(s, goal);
  const int next = std::clamp(s.agent_col + (a == Action::kMoveLeft ? -1 : a == Action::kMoveRight ? 1 : 0),
                              0, s.width - 1);
  if (!column_unsafe(s, next)) {
    if (a == Action::kNoop && s.ammo > 0 && target != nullptr && target->col == s.agent_col) {
      return Action::kShoot;
    }
    return a;
  }
  for (int d : {-1, 1, 0}) {
    const int c = s.agent_col + d;
    if (c >= 0 && c < s.width && !column_unsafe(s, c)) {
      return d < 0 ? Action::kMoveLeft : d > 0 ? Action::kMoveRight : Action::kNoop;
    }
  }
  return a;
}

}  // namespace semrl::world
