#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "semrl/core/kv_config.hpp"
#include "semrl/core/rng.hpp"

namespace semrl::world {

enum class Scenario : std::uint8_t { kDefendLine, kDefendCenter, kSuper };

enum class EntityClass : std::uint8_t { kEnemy, kFireball, kMedipack, kAmmo, kNuisance };
inline constexpr int kNumEntityClasses = 5;

enum class Action : std::uint8_t { kNoop, kMoveLeft, kMoveRight, kShoot };
inline constexpr int kNumActions = 4;

std::string_view to_string(Scenario s);
std::string_view to_string(EntityClass c);
std::string_view to_string(Action a);
Scenario parse_scenario(std::string_view name);

// Health is tracked in half points so the Super degeneration of 0.5/tick is exact.
inline constexpr int kMaxHealthHalves = 200;
inline constexpr int kEnemyDamageHalves = 40;
inline constexpr int kFireballDamageHalves = 30;
inline constexpr int kMedipackHealHalves = 50;
inline constexpr int kDegenerationHalves = 1;
inline constexpr int kAmmoPickup = 5;

struct ArenaConfig {
  int width = 21;
  int height = 15;
  Scenario scenario = Scenario::kDefendLine;
  int max_ticks = 500;
  int nuisance_count = 0;
  // Nuisances outside Super must be asked for explicitly (nuisance sweeps).
  bool nuisance_enabled = false;
  int enemy_spawn_period = 8;
  int enemy_fire_period = 6;
  int item_spawn_period = 10;
  int max_enemies = 6;
  int max_items = 6;
  // Negative selects the scenario default.
  int initial_ammo = -1;
  std::uint64_t rng_seed = 0;

  int starting_ammo() const;
  int agent_row() const;
  bool nuisance_allowed() const { return scenario == Scenario::kSuper || nuisance_enabled; }
  void validate() const;

  // Reads keys width, height, scenario, max_ticks, nuisance_count, ... ; unknown keys ignored.
  static ArenaConfig from_kv(const KvConfig& kv, ArenaConfig base);
  static ArenaConfig from_kv(const KvConfig& kv);
  void to_kv(KvConfig& kv) const;
};

// Named presets: DefendLine, DefendCenter, Super, their desk-scale -mini variants
// and Super-crowded.
ArenaConfig preset(std::string_view name);

struct Entity {
  std::uint32_t id = 0;
  EntityClass cls = EntityClass::kEnemy;
  int col = 0;
  int row = 0;
  bool alive = true;

  bool operator==(const Entity&) const = default;
};

struct WorldState {
  int width = 0;
  int height = 0;
  int agent_row = 0;
  int tick = 0;
  int agent_col = 0;
  int health_halves = kMaxHealthHalves;
  int ammo = 0;
  std::vector<Entity> entities;
  // Kills are the only reward source, so this stays integral.
  double cumulative_reward = 0.0;
  std::uint32_t next_id = 1;
  bool terminal = false;
  rng::Engine rng;

  double health() const { return health_halves / 2.0; }
  int count(EntityClass c) const;

  bool operator==(const WorldState&) const = default;
};

struct StepResult {
  WorldState state;
  double reward = 0.0;
  bool terminal = false;
};

// Nuisance ids live in their own range so dynamic entity ids are identical with
// and without nuisances.
inline constexpr std::uint32_t kNuisanceIdBase = 0x80000000u;

class Arena {
 public:
  explicit Arena(ArenaConfig config);

  const ArenaConfig& config() const { return config_; }

  WorldState reset(std::uint64_t seed) const;
  StepResult step(const WorldState& state, Action action) const;

 private:
  void spawn(WorldState& s) const;

  ArenaConfig config_;
};

// Hand-written policy used as the performance reference for learned agents.
Action scripted_expert(const WorldState& state, const ArenaConfig& config);

}  // namespace semrl::world
