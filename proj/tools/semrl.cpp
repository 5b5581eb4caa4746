// Command-line front end: training runs, experiment grids, sweeps and inspection.
#include <cstdio>
#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "semrl/core/error.hpp"
#include "semrl/harness/inspect.hpp"
#include "semrl/harness/runner.hpp"
#include "semrl/neural/gradcheck.hpp"

using namespace semrl;
using namespace semrl::harness;

namespace {

enum Exit { kOk = 0, kUsage = 1, kRunFailure = 2, kCheckFailure = 3 };

// Flags shared by every training subcommand; each maps onto an experiment key.
struct SpecFlags {
  std::string config;
  std::vector<std::string> sets;
  std::string name, scenarios, algorithms, representations, seeds, out, levels, patches;
  std::optional<std::int64_t> steps, log_interval;
  std::optional<int> workers, n_dir, n_dist, nuisance;
  std::optional<double> expert_fraction;
  bool patches_given = false;

  void attach(CLI::App& app, bool sweep_levels, bool sweep_patches) {
    app.add_option("-c,--config", config, "key=value experiment file")->check(CLI::ExistingFile);
    app.add_option("--set", sets, "override one key, e.g. --set dqn.lr=5e-4");
    app.add_option("--name", name, "experiment name (output subdirectory)");
    app.add_option("--scenarios,--scenario", scenarios, "comma-separated scenario presets");
    app.add_option("--algorithms,--algorithm", algorithms, "dqn and/or ppo");
    app.add_option("--representations,--representation", representations, "raw, seg and/or nl");
    app.add_option("--seeds,--seed", seeds, "comma-separated seeds");
    app.add_option("--steps", steps, "environment steps per run");
    app.add_option("--log-interval", log_interval, "aggregate grid spacing in steps");
    app.add_option("--workers", workers, "concurrent runs");
    app.add_option("--n-dir", n_dir, "direction patches");
    app.add_option("--n-dist", n_dist, "distance bands");
    app.add_option("--nuisance", nuisance, "nuisance objects in the arena");
    app.add_option("--expert-fraction", expert_fraction, "stop once the moving average reaches this share of the expert");
    app.add_option("-o,--out", out, "output directory (relative paths go under $SEMRL_OUTPUT_ROOT)");
    if (sweep_levels) app.add_option("--levels", levels, "comma-separated nuisance levels");
    if (sweep_patches) {
      app.add_option("--patch-counts", patches, "comma-separated direction patch counts")
          ->each([this](const std::string&) { patches_given = true; });
    }
  }

  ExperimentSpec build(const std::string& default_name) const {
    KvConfig kv = config.empty() ? KvConfig{} : KvConfig::load(config);
    if (!kv.has("name")) kv.set("name", default_name);
    auto put = [&kv](const char* key, const std::string& v) {
      if (!v.empty()) kv.set(key, v);
    };
    put("name", name);
    put("scenarios", scenarios);
    put("algorithms", algorithms);
    put("representations", representations);
    put("seeds", seeds);
    put("output_dir", out);
    put("nuisance_levels", levels);
    if (patches_given) kv.set("patch_counts", patches);
    if (steps) kv.set("total_steps", std::to_string(*steps));
    if (log_interval) kv.set("log_interval", std::to_string(*log_interval));
    if (workers) kv.set("workers", std::to_string(*workers));
    if (n_dir) kv.set("n_dir", std::to_string(*n_dir));
    if (n_dist) kv.set("n_dist", std::to_string(*n_dist));
    if (expert_fraction) kv.set("expert_fraction", format_number(*expert_fraction));
    if (nuisance) {
      kv.set("arena.nuisance_count", std::to_string(*nuisance));
      kv.set("arena.nuisance_enabled", "true");
    }
    for (const auto& s : sets) {
      const auto eq = s.find('=');
      if (eq == std::string::npos) throw UsageError("--set expects key=value, got '" + s + "'");
      kv.set(trim(s.substr(0, eq)), trim(s.substr(eq + 1)));
    }
    return ExperimentSpec::from_kv(kv);
  }
};

void report(const SweepResult& r) {
  std::cout << "spec hash " << hex(r.spec_hash) << "\n";
  for (const auto& run : r.runs) {
    std::cout << run.scenario << ' ' << to_string(run.algorithm) << ' ' << agents::to_string(run.representation);
    if (!run.condition.empty()) std::cout << ' ' << run.condition;
    std::cout << " seed " << run.seed << ": final " << run.final_reward << " (expert " << run.expert_reward << ") "
              << run.steps << " steps " << run.wall_seconds << " s";
    if (run.failed()) std::cout << " FAILED: " << run.failure;
    std::cout << "\n";
  }
  std::cout << "aggregate: " << r.aggregate_csv.string() << "\nsummary: " << r.summary_csv.string() << "\n";
  for (const auto& s : r.svgs) std::cout << "plot: " << s.string() << "\n";
}

int status(const SweepResult& r) {
  if (r.failures > 0) {
    std::cerr << r.failures << " run(s) failed\n";
    return kRunFailure;
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Semantic state representations for reinforcement learning"};
  app.require_subcommand(1);

  SpecFlags run_flags, grid_flags, nuis_flags, patch_flags, eval_flags;
  auto* run = app.add_subcommand("run", "train one agent");
  run_flags.attach(*run, false, false);
  auto* grid = app.add_subcommand("grid", "representation comparison over scenarios, algorithms and seeds");
  grid_flags.attach(*grid, false, false);
  auto* nuis = app.add_subcommand("nuisance-sweep", "the comparison repeated per nuisance level");
  nuis_flags.attach(*nuis, true, false);
  auto* patch = app.add_subcommand("patch-sweep", "NL runs across direction patch counts");
  patch_flags.attach(*patch, false, true);

  auto* grad = app.add_subcommand("gradcheck", "finite-difference check of every op and encoder");
  std::uint64_t grad_seed = 1;
  grad->add_option("--seed", grad_seed, "seed for random inputs");

  auto* desc = app.add_subcommand("describe", "print the sentence and dumps for one arena state");
  std::string d_scenario = "DefendLine", d_frame;
  std::uint64_t d_seed = 0;
  int d_tick = 0, d_dir = 3, d_dist = 3;
  std::optional<int> d_variant;
  desc->add_option("--scenario", d_scenario, "scenario preset");
  desc->add_option("--seed", d_seed, "episode seed");
  desc->add_option("--tick", d_tick, "tick to stop at (no-op policy)");
  desc->add_option("--n-dir", d_dir, "direction patches");
  desc->add_option("--n-dist", d_dist, "distance bands");
  desc->add_option("--variant", d_variant, "pin every clause to one template variant");
  desc->add_option("--frame", d_frame, "write the raw frame as PPM");

  auto* eval = app.add_subcommand("eval", "roll out a saved checkpoint");
  eval_flags.attach(*eval, false, false);
  std::string e_ckpt;
  int e_episodes = 100;
  eval->add_option("--checkpoint", e_ckpt, "model.ckpt written by a run")->required()->check(CLI::ExistingFile);
  eval->add_option("--episodes", e_episodes, "evaluation episodes");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kUsage;
  }

  try {
    if (run->parsed()) {
      const auto spec = run_flags.build("run");
      if (spec.scenarios.size() != 1 || spec.algorithms.size() != 1 || spec.representations.size() != 1 ||
          spec.seeds.size() != 1) {
        throw UsageError("run takes exactly one scenario, algorithm, representation and seed; use grid for more");
      }
      const auto r = run_grid(spec);
      report(r);
      return status(r);
    }
    if (grid->parsed()) {
      const auto r = run_grid(grid_flags.build("grid"));
      report(r);
      return status(r);
    }
    if (nuis->parsed()) {
      const auto r = run_nuisance_sweep(nuis_flags.build("nuisance-sweep"));
      report(r);
      return status(r);
    }
    if (patch->parsed()) {
      auto spec = patch_flags.build("patch-sweep");
      const auto r = run_patch_sweep(spec);
      report(r);
      std::cout << "table: " << r.table_csv.string() << "\n";
      for (const auto& row : r.table) {
        std::cout << "n_dir " << row.n_dir << ": final " << row.final_mean << " +- " << row.final_std << ", "
                  << row.mean_words << " words/state, L_max " << row.token_length << ", truncations "
                  << row.truncations << "\n";
      }
      for (double s : r.spread_percent) std::cout << "spread " << s << "% of best\n";
      return status(r);
    }
    if (grad->parsed()) {
      const auto results = nn::run_gradcheck_suite(grad_seed);
      bool ok = true;
      for (const auto& r : results) {
        std::printf("%-32s max rel err %.3e  %s\n", r.name.c_str(), r.max_rel_error, r.passed ? "ok" : "FAIL");
        ok = ok && r.passed;
      }
      return ok ? kOk : kCheckFailure;
    }
    if (desc->parsed()) {
      const auto bank = langgen::TemplateBank::load_default();
      const auto vocab = langgen::Vocabulary::from_bank(bank);
      DescribeRequest req;
      req.scenario = d_scenario;
      req.seed = d_seed;
      req.tick = d_tick;
      req.grid = {d_dir, d_dist};
      req.variant = d_variant;
      req.frame_path = d_frame.empty() ? std::filesystem::path{} : resolve_output(d_frame);
      print_description(std::cout, describe_state(req, bank, vocab), !d_variant.has_value());
      return kOk;
    }
    if (eval->parsed()) {
      const auto spec = eval_flags.build("eval");
      const auto s = resolve_run(spec, spec.scenarios.front(), spec.algorithms.front(), spec.representations.front(),
                                 spec.seeds.front());
      const auto bank = langgen::TemplateBank::load_default();
      const auto vocab = langgen::Vocabulary::from_bank(bank);
      const auto r = evaluate_checkpoint(s, e_ckpt, e_episodes, bank, vocab);
      std::cout << "episodes " << r.episodes << " mean reward " << r.mean_reward << " +- " << r.std_reward
                << " (scripted expert " << r.expert_reward << ")\n";
      return kOk;
    }
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kRunFailure;
  }
  return kOk;
}
