#include "semrl/harness/runner.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <mutex>
#include <thread>

#include "json.hpp"
#include "semrl/core/error.hpp"
#include "semrl/harness/svg.hpp"

namespace semrl::harness {

namespace {

using agents::Representation;

constexpr std::uint64_t kExpertSeed = 0x5EED0E;

agents::ArenaEnv make_env(const RunSettings& s, const langgen::TemplateBank& bank, const langgen::Vocabulary& vocab) {
  agents::ArenaEnvConfig ec;
  ec.arena = s.arena;
  ec.representation = s.representation;
  ec.grid = s.grid;
  ec.token_length = s.token_length;
  ec.seed = s.seed;
  return agents::ArenaEnv(ec, bank, vocab);
}

struct Job {
  RunSettings settings;
  std::string condition;
  std::filesystem::path dir;
};

std::vector<RunRecord> run_jobs(const std::vector<Job>& jobs, int workers, std::uint64_t hash,
                                const langgen::TemplateBank& bank, const langgen::Vocabulary& vocab) {
  std::vector<RunRecord> out(jobs.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++) {
      out[i] = execute_run(jobs[i].settings, jobs[i].dir, hash, bank, vocab);
      out[i].condition = jobs[i].condition;
    }
  };
  const int n = std::max(1, std::min<int>(workers, static_cast<int>(jobs.size())));
  if (n == 1) {
    work();
    return out;
  }
  std::vector<std::thread> pool;
  for (int t = 0; t < n; ++t) pool.emplace_back(work);
  for (auto& t : pool) t.join();
  return out;
}

std::string rep_name(Representation r) { return std::string(agents::to_string(r)); }
std::string alg_name(Algorithm a) { return std::string(to_string(a)); }

// Runs sharing everything but the seed.
struct Group {
  std::string scenario;
  Algorithm algorithm;
  std::string condition;
  Representation representation;
  std::vector<const RunRecord*> runs;
};

std::vector<Group> group_runs(const std::vector<RunRecord>& runs) {
  std::vector<Group> groups;
  for (const auto& r : runs) {
    auto it = std::find_if(groups.begin(), groups.end(), [&](const Group& g) {
      return g.scenario == r.scenario && g.algorithm == r.algorithm && g.condition == r.condition &&
             g.representation == r.representation;
    });
    if (it == groups.end()) {
      groups.push_back({r.scenario, r.algorithm, r.condition, r.representation, {}});
      it = groups.end() - 1;
    }
    it->runs.push_back(&r);
  }
  return groups;
}

std::vector<std::int64_t> grid_steps(const ExperimentSpec& spec) {
  const std::int64_t dt = spec.interval();
  std::vector<std::int64_t> steps;
  for (std::int64_t s = dt; s <= spec.total_steps; s += dt) steps.push_back(s);
  if (steps.empty() && spec.total_steps > 0) steps.push_back(spec.total_steps);
  return steps;
}

// Moving average of the last episode finished by `step`, if any.
bool value_at(const std::vector<agents::CurveRow>& curve, std::int64_t step, double& v) {
  auto it = std::upper_bound(curve.begin(), curve.end(), step,
                             [](std::int64_t s, const agents::CurveRow& r) { return s < r.step; });
  if (it == curve.begin()) return false;
  v = std::prev(it)->moving_avg;
  return true;
}

struct Aggregate {
  std::vector<double> x, mean, sd;
};

Aggregate aggregate(const Group& g, const std::vector<std::int64_t>& steps) {
  Aggregate a;
  for (auto s : steps) {
    std::vector<double> vals;
    for (const auto* r : g.runs) {
      double v = 0.0;
      if (value_at(r->curve, s, v)) vals.push_back(v);
    }
    if (vals.empty()) continue;
    const auto [m, d] = mean_std(vals);
    a.x.push_back(static_cast<double>(s));
    a.mean.push_back(m);
    a.sd.push_back(d);
  }
  return a;
}

void write_outputs(const ExperimentSpec& spec, SweepResult& res, bool panel_per_condition) {
  const auto groups = group_runs(res.runs);
  const auto steps = grid_steps(spec);

  res.aggregate_csv = res.root / "aggregate.csv";
  {
    std::ofstream out(res.aggregate_csv);
    out << "scenario,algorithm,condition,representation,step,mean,std,runs\n";
    for (const auto& g : groups) {
      for (auto s : steps) {
        std::vector<double> vals;
        for (const auto* r : g.runs) {
          double v = 0.0;
          if (value_at(r->curve, s, v)) vals.push_back(v);
        }
        if (vals.empty()) continue;
        const auto [m, d] = mean_std(vals);
        out << g.scenario << ',' << alg_name(g.algorithm) << ',' << g.condition << ',' << rep_name(g.representation)
            << ',' << s << ',' << format_number(m) << ',' << format_number(d) << ',' << vals.size() << '\n';
      }
    }
  }

  res.summary_csv = res.root / "summary.csv";
  {
    std::ofstream out(res.summary_csv);
    out << "scenario,algorithm,condition,representation,runs,final_mean,final_std,expert_reward,failures,"
           "mean_words,truncations\n";
    for (const auto& g : groups) {
      std::vector<double> finals;
      int failed = 0;
      double words = 0.0;
      std::int64_t trunc = 0;
      for (const auto* r : g.runs) {
        finals.push_back(r->final_reward);
        failed += r->failed() ? 1 : 0;
        words += r->mean_words();
        trunc += r->truncations;
      }
      const auto [m, d] = mean_std(finals);
      out << g.scenario << ',' << alg_name(g.algorithm) << ',' << g.condition << ',' << rep_name(g.representation) << ','
          << g.runs.size() << ',' << format_number(m) << ',' << format_number(d) << ','
          << format_number(g.runs.front()->expert_reward) << ',' << failed << ','
          << format_number(words / static_cast<double>(g.runs.size())) << ',' << trunc << '\n';
    }
  }

  // One chart per (scenario, algorithm).
  std::vector<std::pair<std::string, Algorithm>> keys;
  for (const auto& g : groups) {
    if (std::find(keys.begin(), keys.end(), std::pair{g.scenario, g.algorithm}) == keys.end()) {
      keys.emplace_back(g.scenario, g.algorithm);
    }
  }
  for (const auto& [scenario, alg] : keys) {
    Chart chart;
    chart.title = scenario + " / " + alg_name(alg);
    for (const auto& g : groups) {
      if (g.scenario != scenario || g.algorithm != alg) continue;
      const std::string panel_title = panel_per_condition ? g.condition : "";
      auto it = std::find_if(chart.panels.begin(), chart.panels.end(),
                             [&](const Panel& p) { return p.title == panel_title; });
      if (it == chart.panels.end()) {
        chart.panels.push_back({panel_title, {}});
        it = chart.panels.end() - 1;
      }
      const auto a = aggregate(g, steps);
      const std::string label = panel_per_condition || g.condition.empty() ? rep_name(g.representation) : g.condition;
      it->series.push_back({label, a.x, a.mean, a.sd});
    }
    const auto path = res.root / (scenario + "_" + alg_name(alg) + ".svg");
    write_svg(path, chart);
    res.svgs.push_back(path);
  }

  std::ofstream log(res.root / "runs.jsonl");
  for (const auto& r : res.runs) {
    nlohmann::ordered_json j;
    j["spec_hash"] = hex(r.spec_hash);
    j["scenario"] = r.scenario;
    j["algorithm"] = alg_name(r.algorithm);
    j["representation"] = rep_name(r.representation);
    j["condition"] = r.condition;
    j["seed"] = r.seed;
    j["steps"] = r.steps;
    j["updates"] = r.updates;
    j["episodes"] = r.curve.size();
    j["episode_rewards"] = [&] {
      std::vector<double> v;
      for (const auto& c : r.curve) v.push_back(c.reward);
      return v;
    }();
    j["final_reward"] = r.final_reward;
    j["expert_reward"] = r.expert_reward;
    j["wall_seconds"] = r.wall_seconds;
    j["curve"] = r.curve_path.string();
    j["checkpoint"] = r.checkpoint_path.string();
    j["encoder_parameters"] = r.encoder_parameters;
    if (r.representation == Representation::kNL) {
      j["token_length"] = r.token_length;
      j["mean_words"] = r.mean_words();
      j["truncations"] = r.truncations;
    }
    j["diverged"] = r.diverged;
    j["stopped_early"] = r.stopped_early;
    j["failure"] = r.failure;
    log << j.dump() << '\n';
  }
}

// Refuses comparisons whose encoders differ in size by more than 2x.
void check_parameter_parity(const ExperimentSpec& spec, const std::filesystem::path& root,
                            const langgen::TemplateBank& bank, const langgen::Vocabulary& vocab) {
  std::ofstream out(root / "params.csv");
  out << "scenario,algorithm,representation,encoder_parameters\n";
  std::string problems;
  for (const auto& scenario : spec.scenarios) {
    for (auto alg : spec.algorithms) {
      std::size_t lo = SIZE_MAX, hi = 0;
      for (auto rep : spec.representations) {
        const auto n = encoder_parameter_count(resolve_run(spec, scenario, alg, rep, 0), bank, vocab);
        out << scenario << ',' << alg_name(alg) << ',' << rep_name(rep) << ',' << n << '\n';
        lo = std::min(lo, n);
        hi = std::max(hi, n);
      }
      if (hi > 2 * lo) {
        problems += " " + scenario + "/" + alg_name(alg) + " (" + std::to_string(lo) + " vs " + std::to_string(hi) + ")";
      }
    }
  }
  if (!problems.empty()) throw ConfigError("encoder parameter counts differ by more than 2x:" + problems);
}

std::filesystem::path prepare_root(const ExperimentSpec& spec, std::uint64_t hash) {
  const auto root = resolve_output(spec.output_dir) / spec.name;
  std::filesystem::create_directories(root);
  std::ofstream out(root / "spec.cfg");
  out << "# spec hash " << hex(hash) << "\n" << spec.to_kv().to_string();
  return root;
}

std::filesystem::path run_dir(const std::filesystem::path& root, const RunSettings& s, const std::string& condition) {
  auto d = root / "runs" / s.scenario / alg_name(s.algorithm) / rep_name(s.representation);
  if (!condition.empty()) d /= condition;
  return d / ("seed" + std::to_string(s.seed));
}

struct Language {
  langgen::TemplateBank bank = langgen::TemplateBank::load_default();
  langgen::Vocabulary vocab = langgen::Vocabulary::from_bank(bank);
};

void count_failures(SweepResult& res) {
  res.failures = static_cast<int>(std::count_if(res.runs.begin(), res.runs.end(), [](const RunRecord& r) {
    return r.failed();
  }));
}

}  // namespace

std::pair<double, double> mean_std(const std::vector<double>& v) {
  if (v.empty()) return {0.0, 0.0};
  double m = 0.0;
  for (double x : v) m += x;
  m /= static_cast<double>(v.size());
  if (v.size() == 1) return {m, 0.0};
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return {m, std::sqrt(s / static_cast<double>(v.size() - 1))};
}

double expert_mean_reward(const world::ArenaConfig& arena, int episodes) {
  world::Arena a(arena);
  double total = 0.0;
  for (int e = 0; e < episodes; ++e) {
    auto s = a.reset(agents::episode_seed(kExpertSeed, e));
    while (!s.terminal) {
      auto r = a.step(s, world::scripted_expert(s, arena));
      total += r.reward;
      s = std::move(r.state);
    }
  }
  return episodes > 0 ? total / episodes : 0.0;
}

std::size_t encoder_parameter_count(const RunSettings& s, const langgen::TemplateBank& bank,
                                    const langgen::Vocabulary& vocab) {
  const auto env = make_env(s, bank, vocab);
  rng::Engine probe(0);
  return nn::make_encoder<float>(agents::encoder_for(env.spec(), s.encoder), probe, "probe")->parameter_count();
}

RunRecord execute_run(const RunSettings& s, const std::filesystem::path& dir, std::uint64_t hash,
                      const langgen::TemplateBank& bank, const langgen::Vocabulary& vocab) {
  const auto t0 = std::chrono::steady_clock::now();
  RunRecord rec;
  rec.spec_hash = hash;
  rec.scenario = s.scenario;
  rec.algorithm = s.algorithm;
  rec.representation = s.representation;
  rec.seed = s.seed;
  rec.curve_path = dir / "curve.csv";
  rec.checkpoint_path = dir / "model.ckpt";
  try {
    std::filesystem::create_directories(dir);
    auto env = make_env(s, bank, vocab);
    rec.token_length = env.spec().token_length;
    rec.expert_reward = expert_mean_reward(s.arena);
    agents::TrainOptions opt;
    opt.total_steps = s.total_steps;
    opt.seed = s.seed;
    if (s.expert_fraction > 0.0) opt.stop_reward = s.expert_fraction * rec.expert_reward;
    opt.checkpoint = rec.checkpoint_path;
    opt.vocab_hash = s.representation == Representation::kNL ? vocab.hash() : 0;
    const auto enc = agents::encoder_for(env.spec(), s.encoder);
    agents::TrainResult tr;
    if (s.algorithm == Algorithm::kDqn) {
      agents::DqnAgent agent(env.spec(), env.num_actions(), enc, s.dqn, s.seed);
      rec.encoder_parameters = agent.online().encoder().parameter_count();
      tr = agents::train_dqn(agent, env, opt);
    } else {
      agents::PpoAgent agent(env.spec(), env.num_actions(), enc, s.ppo, s.seed);
      rec.encoder_parameters = agent.net().encoder().parameter_count();
      tr = agents::train_ppo(agent, env, opt);
    }
    rec.curve = std::move(tr.curve);
    rec.steps = tr.steps;
    rec.updates = tr.updates;
    rec.diverged = tr.diverged;
    rec.stopped_early = tr.stopped_early;
    rec.failure = tr.failure;
    rec.final_reward = agents::tail_mean(rec.curve);
    rec.sentences = env.sentences();
    rec.words = env.words();
    rec.truncations = env.truncations();
    if (rec.diverged) rec.checkpoint_path += ".diverged";
    agents::write_curve_csv(rec.curve_path, rec.curve);
  } catch (const std::exception& e) {
    rec.failure = e.what();
  }
  rec.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rec;
}

SweepResult run_grid(const ExperimentSpec& spec) {
  spec.validate();
  check_fairness(spec);
  const Language lang;
  SweepResult res;
  res.spec_hash = spec_hash(spec, lang.bank);
  res.root = prepare_root(spec, res.spec_hash);
  check_parameter_parity(spec, res.root, lang.bank, lang.vocab);
  std::vector<Job> jobs;
  for (const auto& scenario : spec.scenarios) {
    for (auto alg : spec.algorithms) {
      for (auto rep : spec.representations) {
        for (auto seed : spec.seeds) {
          auto s = resolve_run(spec, scenario, alg, rep, seed);
          jobs.push_back({s, "", run_dir(res.root, s, "")});
        }
      }
    }
  }
  res.runs = run_jobs(jobs, spec.workers, res.spec_hash, lang.bank, lang.vocab);
  write_outputs(spec, res, false);
  count_failures(res);
  return res;
}

SweepResult run_nuisance_sweep(const ExperimentSpec& spec) {
  spec.validate();
  if (spec.nuisance_levels.empty()) throw UsageError("nuisance sweep needs at least one level");
  check_fairness(spec);
  const Language lang;
  SweepResult res;
  res.spec_hash = spec_hash(spec, lang.bank);
  res.root = prepare_root(spec, res.spec_hash);
  check_parameter_parity(spec, res.root, lang.bank, lang.vocab);
  std::vector<Job> jobs;
  for (const auto& scenario : spec.scenarios) {
    for (auto alg : spec.algorithms) {
      for (int level : spec.nuisance_levels) {
        const std::string cond = "nuisance=" + std::to_string(level);
        for (auto rep : spec.representations) {
          for (auto seed : spec.seeds) {
            auto s = resolve_run(spec, scenario, alg, rep, seed);
            s.arena.nuisance_count = level;
            s.arena.nuisance_enabled = true;
            s.arena.validate();
            jobs.push_back({s, cond, run_dir(res.root, s, cond)});
          }
        }
      }
    }
  }
  res.runs = run_jobs(jobs, spec.workers, res.spec_hash, lang.bank, lang.vocab);
  write_outputs(spec, res, true);
  count_failures(res);
  return res;
}

PatchSweepResult run_patch_sweep(const ExperimentSpec& spec) {
  if (spec.patch_counts.empty()) throw UsageError("patch sweep needs at least one patch count");
  spec.validate();
  const Language lang;
  PatchSweepResult res;
  res.spec_hash = spec_hash(spec, lang.bank);
  res.root = prepare_root(spec, res.spec_hash);
  std::vector<Job> jobs;
  for (const auto& scenario : spec.scenarios) {
    for (auto alg : spec.algorithms) {
      for (int n : spec.patch_counts) {
        const std::string cond = "n_dir=" + std::to_string(n);
        for (auto seed : spec.seeds) {
          auto s = resolve_run(spec, scenario, alg, Representation::kNL, seed);
          s.grid.n_dir = n;
          jobs.push_back({s, cond, run_dir(res.root, s, cond)});
        }
      }
    }
  }
  res.runs = run_jobs(jobs, spec.workers, res.spec_hash, lang.bank, lang.vocab);
  write_outputs(spec, res, false);
  count_failures(res);

  res.table_csv = res.root / "patch_table.csv";
  std::ofstream out(res.table_csv);
  out << "scenario,algorithm,n_dir,final_mean,final_std,mean_words,token_length,truncations\n";
  for (const auto& scenario : spec.scenarios) {
    for (auto alg : spec.algorithms) {
      std::vector<double> finals_by_n;
      Chart chart;
      chart.title = scenario + " / " + alg_name(alg) + ": final reward vs direction patches";
      chart.x_label = "direction patches";
      chart.y_label = "final reward (last 100 episodes)";
      Series series{"nl", {}, {}, {}};
      for (int n : spec.patch_counts) {
        PatchRow row{scenario, alg, n};
        std::vector<double> finals;
        double words = 0.0;
        for (const auto& r : res.runs) {
          if (r.scenario != scenario || r.algorithm != alg || r.condition != "n_dir=" + std::to_string(n)) continue;
          finals.push_back(r.final_reward);
          words += r.mean_words();
          row.truncations += r.truncations;
          row.token_length = r.token_length;
        }
        std::tie(row.final_mean, row.final_std) = mean_std(finals);
        row.mean_words = finals.empty() ? 0.0 : words / static_cast<double>(finals.size());
        out << scenario << ',' << alg_name(alg) << ',' << n << ',' << format_number(row.final_mean) << ','
            << format_number(row.final_std) << ',' << format_number(row.mean_words) << ',' << row.token_length << ','
            << row.truncations << '\n';
        finals_by_n.push_back(row.final_mean);
        series.x.push_back(n);
        series.mean.push_back(row.final_mean);
        series.spread.push_back(row.final_std);
        res.table.push_back(row);
      }
      const double hi = *std::max_element(finals_by_n.begin(), finals_by_n.end());
      const double lo = *std::min_element(finals_by_n.begin(), finals_by_n.end());
      res.spread_percent.push_back(std::abs(hi) > 0.0 ? 100.0 * (hi - lo) / std::abs(hi) : 0.0);
      chart.panels.push_back({"", {series}});
      const auto path = res.root / (scenario + "_" + alg_name(alg) + "_patches.svg");
      write_svg(path, chart);
      res.svgs.push_back(path);
    }
  }
  return res;
}

}  // namespace semrl::harness
