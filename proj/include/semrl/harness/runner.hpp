#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "semrl/agents/train.hpp"
#include "semrl/harness/spec.hpp"

namespace semrl::harness {

struct RunRecord {
  std::uint64_t spec_hash = 0;
  std::string scenario;
  Algorithm algorithm = Algorithm::kPpo;
  agents::Representation representation = agents::Representation::kNL;
  std::uint64_t seed = 0;
  std::string condition;  // "nuisance=40", "n_dir=7", empty for a plain grid
  std::vector<agents::CurveRow> curve;
  double final_reward = 0.0;  // mean of the last 100 episodes
  double expert_reward = 0.0;
  std::int64_t steps = 0;
  std::int64_t updates = 0;
  double wall_seconds = 0.0;
  std::filesystem::path curve_path;
  std::filesystem::path checkpoint_path;
  std::int64_t sentences = 0;
  std::int64_t words = 0;
  std::int64_t truncations = 0;
  int token_length = 0;
  std::size_t encoder_parameters = 0;
  bool diverged = false;
  bool stopped_early = false;
  std::string failure;

  bool failed() const { return diverged || !failure.empty(); }
  double mean_words() const { return sentences > 0 ? static_cast<double>(words) / sentences : 0.0; }
};

// Mean episode reward of the scripted expert over fixed evaluation seeds.
double expert_mean_reward(const world::ArenaConfig& arena, int episodes = 100);

// Trains one agent and writes curve.csv and model.ckpt into run_dir.
RunRecord execute_run(const RunSettings& settings, const std::filesystem::path& run_dir, std::uint64_t hash,
                      const langgen::TemplateBank& bank, const langgen::Vocabulary& vocab);

// Number of trainable encoder parameters a run would use.
std::size_t encoder_parameter_count(const RunSettings& settings, const langgen::TemplateBank& bank,
                                    const langgen::Vocabulary& vocab);

struct SweepResult {
  std::filesystem::path root;
  std::uint64_t spec_hash = 0;
  std::vector<RunRecord> runs;
  std::filesystem::path aggregate_csv;
  std::filesystem::path summary_csv;
  std::vector<std::filesystem::path> svgs;
  int failures = 0;
};

// scenario x algorithm x representation x seed.
SweepResult run_grid(const ExperimentSpec& spec);
// The grid repeated per nuisance level, one SVG panel per level.
SweepResult run_nuisance_sweep(const ExperimentSpec& spec);

struct PatchRow {
  std::string scenario;
  Algorithm algorithm = Algorithm::kPpo;
  int n_dir = 0;
  double final_mean = 0.0;
  double final_std = 0.0;
  double mean_words = 0.0;
  int token_length = 0;
  std::int64_t truncations = 0;
};

struct PatchSweepResult : SweepResult {
  std::vector<PatchRow> table;
  std::filesystem::path table_csv;
  // (max - min) / |max| of the final means, in percent, per (scenario, algorithm).
  std::vector<double> spread_percent;
};

// NL runs for each n_dir in spec.patch_counts; UsageError on an empty list.
PatchSweepResult run_patch_sweep(const ExperimentSpec& spec);

// Mean and sample standard deviation (0 for one value).
std::pair<double, double> mean_std(const std::vector<double>& v);

}  // namespace semrl::harness
