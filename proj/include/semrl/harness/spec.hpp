#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "semrl/agents/arena_env.hpp"
#include "semrl/agents/dqn.hpp"
#include "semrl/agents/ppo.hpp"
#include "semrl/core/kv_config.hpp"

namespace semrl::harness {

enum class Algorithm { kDqn, kPpo };

std::string_view to_string(Algorithm a);
Algorithm parse_algorithm(std::string_view name);

// Version string folded into every spec hash.
std::string_view code_version();

// Everything a grid, sweep or single run needs. Hyperparameters live in one
// shared block; keys prefixed "<rep>." (raw., seg., nl.) override it for one
// representation and are subject to the fairness check.
struct ExperimentSpec {
  std::string name = "experiment";
  std::vector<std::string> scenarios{"DefendLine-mini"};
  std::vector<Algorithm> algorithms{Algorithm::kPpo};
  std::vector<agents::Representation> representations{agents::Representation::kRaw, agents::Representation::kSeg,
                                                      agents::Representation::kNL};
  std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4};
  std::int64_t total_steps = 200000;
  // Spacing of the aggregate grid in environment steps; 0 means total/100.
  std::int64_t log_interval = 0;
  std::vector<int> nuisance_levels{0, 20, 60};
  std::vector<int> patch_counts{3, 7, 15, 31};
  int n_dir = 3;
  int n_dist = 3;
  // Sentence row length; 0 sizes it to the no-truncation bound.
  int token_length = 0;
  // Early stop once the moving average reaches this share of the scripted
  // expert's mean reward; 0 disables.
  double expert_fraction = 0.0;
  int workers = 1;
  std::filesystem::path output_dir = "runs";

  KvConfig arena;  // arena overrides, stored without the "arena." prefix
  agents::DqnConfig dqn;
  agents::PpoConfig ppo;
  nn::EncoderSpec encoder;
  std::map<agents::Representation, KvConfig> overrides;

  static ExperimentSpec from_kv(const KvConfig& kv);
  static ExperimentSpec load(const std::filesystem::path& path);
  // Canonical dump; from_kv(to_kv()) reproduces the spec.
  KvConfig to_kv() const;
  // Shared block with one representation's overrides applied.
  KvConfig effective(agents::Representation rep) const;
  void validate() const;
  std::int64_t interval() const;
};

// Binds a record to the exact configuration, template bank and code version.
std::uint64_t spec_hash(const ExperimentSpec& spec, const langgen::TemplateBank& bank);
std::string hex(std::uint64_t v);

// Keys that may legitimately differ between representations: encoder
// architecture blocks that only one family of inputs uses.
bool representation_specific(const std::string& key);

// Refuses (ConfigError) a comparison whose representations disagree on any
// shared hyperparameter, naming every offending key.
void check_fairness(const ExperimentSpec& spec);

// One fully resolved training run.
struct RunSettings {
  std::string scenario;
  world::ArenaConfig arena;
  Algorithm algorithm = Algorithm::kPpo;
  agents::Representation representation = agents::Representation::kNL;
  std::uint64_t seed = 0;
  std::int64_t total_steps = 0;
  langgen::PatchGrid grid;
  int token_length = 0;
  agents::DqnConfig dqn;
  agents::PpoConfig ppo;
  nn::EncoderSpec encoder;
  double expert_fraction = 0.0;
};

RunSettings resolve_run(const ExperimentSpec& spec, const std::string& scenario, Algorithm alg,
                        agents::Representation rep, std::uint64_t seed);

// Output root: absolute paths are kept; relative ones are placed under
// $SEMRL_OUTPUT_ROOT when set.
std::filesystem::path resolve_output(const std::filesystem::path& dir);

}  // namespace semrl::harness
