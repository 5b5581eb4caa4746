#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "semrl/core/error.hpp"
#include "semrl/harness/inspect.hpp"
#include "semrl/harness/runner.hpp"
#include "semrl/harness/svg.hpp"

using namespace semrl;
using namespace semrl::harness;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("semrl_test_harness_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

ExperimentSpec tiny_grid(const fs::path& out, const std::string& name) {
  KvConfig kv;
  kv.set("name", name);
  kv.set("scenarios", "DefendLine-mini");
  kv.set("algorithms", "ppo");
  kv.set("representations", "raw,seg,nl");
  kv.set("seeds", "0,1");
  kv.set("total_steps", "600");
  kv.set("ppo.rollout", "128");
  kv.set("ppo.minibatch", "32");
  kv.set("output_dir", out.string());
  return ExperimentSpec::from_kv(kv);
}

int count_named(const fs::path& root, const std::string& filename) {
  int n = 0;
  for (const auto& e : fs::recursive_directory_iterator(root)) n += e.path().filename() == filename;
  return n;
}

int count_ext(const fs::path& dir, const std::string& ext) {
  int n = 0;
  for (const auto& e : fs::directory_iterator(dir)) n += e.path().extension() == ext;
  return n;
}

const langgen::TemplateBank& bank() {
  static const auto b = langgen::TemplateBank::load_default();
  return b;
}

}  // namespace

TEST_CASE("spec kv round trip is canonical") {
  KvConfig kv;
  kv.set("scenarios", "Super-mini, DefendLine-mini");
  kv.set("algorithms", "dqn,ppo");
  kv.set("seeds", "3,1");
  kv.set("dqn.lr", "0.0005");
  kv.set("ppo.clip", "0.1");
  kv.set("arena.nuisance_count", "40");
  kv.set("nl.text.filters", "16");
  kv.set("patch_counts", "3,7");
  const auto a = ExperimentSpec::from_kv(kv);
  const auto b = ExperimentSpec::from_kv(a.to_kv());
  CHECK(a.to_kv().values() == b.to_kv().values());
  CHECK(b.scenarios == std::vector<std::string>{"Super-mini", "DefendLine-mini"});
  CHECK(b.dqn.lr == doctest::Approx(5e-4));
  CHECK(b.seeds == std::vector<std::uint64_t>{3, 1});
  CHECK(b.arena.get_int("nuisance_count", 0) == 40);
  CHECK(b.effective(agents::Representation::kNL).get_int("text.filters", 0) == 16);
  CHECK(b.effective(agents::Representation::kRaw).get_int("text.filters", 0) == 32);
}

TEST_CASE("spec rejects unknown keys and bad values") {
  KvConfig kv;
  kv.set("dqn.learning_rate", "0.1");
  CHECK_THROWS_AS(ExperimentSpec::from_kv(kv), ConfigError);
  KvConfig arena;
  arena.set("arena.gravity", "1");
  CHECK_THROWS_AS(ExperimentSpec::from_kv(arena), ConfigError);
  KvConfig alg;
  alg.set("algorithms", "sarsa");
  CHECK_THROWS_AS(ExperimentSpec::from_kv(alg), ConfigError);
}

TEST_CASE("fairness check names every differing shared hyperparameter") {
  KvConfig kv;
  kv.set("raw.ppo.lr", "0.001");
  kv.set("nl.ppo.clip", "0.3");
  const auto spec = ExperimentSpec::from_kv(kv);
  try {
    check_fairness(spec);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("ppo.lr") != std::string::npos);
    CHECK(msg.find("ppo.clip") != std::string::npos);
  }
  KvConfig ok;
  ok.set("nl.text.filters", "8");
  ok.set("raw.image.filters1", "8");
  CHECK_NOTHROW(check_fairness(ExperimentSpec::from_kv(ok)));
}

TEST_CASE("spec hash is stable and sensitive to results-relevant keys only") {
  ExperimentSpec a;
  ExperimentSpec b;
  b.name = "other";
  b.workers = 4;
  b.output_dir = "/elsewhere";
  CHECK(spec_hash(a, bank()) == spec_hash(b, bank()));
  ExperimentSpec c;
  c.ppo.lr = 1e-4;
  CHECK(spec_hash(a, bank()) != spec_hash(c, bank()));
  ExperimentSpec d;
  d.seeds = {0, 1, 2, 3, 5};
  CHECK(spec_hash(a, bank()) != spec_hash(d, bank()));
  CHECK(hex(0x2aULL) == "000000000000002a");
}

TEST_CASE("tiny grid writes one curve per run, one aggregate and one plot") {
  const auto dir = scratch("grid");
  const auto r = run_grid(tiny_grid(dir, "g"));
  CHECK(r.failures == 0);
  CHECK(r.runs.size() == 6);
  CHECK(count_named(r.root / "runs", "curve.csv") == 6);
  CHECK(count_named(r.root / "runs", "model.ckpt") == 6);
  CHECK(count_named(r.root, "aggregate.csv") == 1);
  CHECK(count_ext(r.root, ".svg") == 1);
  CHECK(fs::exists(r.root / "summary.csv"));
  CHECK(fs::exists(r.root / "spec.cfg"));
  CHECK(slurp(r.root / "spec.cfg").find(hex(r.spec_hash)) != std::string::npos);
  for (const auto& run : r.runs) {
    CHECK(run.steps == 600);
    CHECK(run.spec_hash == r.spec_hash);
    CHECK(fs::exists(run.curve_path));
  }
  const auto agg = slurp(r.aggregate_csv);
  CHECK(agg.rfind("scenario,algorithm,condition,representation,step,mean,std,runs\n", 0) == 0);
  CHECK(agg.find(",raw,") != std::string::npos);
  CHECK(agg.find(",seg,") != std::string::npos);
  CHECK(agg.find(",nl,") != std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("identical grids give byte-identical aggregates") {
  const auto dir = scratch("determinism");
  auto spec = tiny_grid(dir, "first");
  spec.representations = {agents::Representation::kSeg, agents::Representation::kNL};
  const auto a = run_grid(spec);
  spec.name = "second";
  spec.workers = 2;
  const auto b = run_grid(spec);
  CHECK(a.spec_hash == b.spec_hash);
  CHECK(slurp(a.aggregate_csv) == slurp(b.aggregate_csv));
  CHECK(slurp(a.summary_csv) == slurp(b.summary_csv));
  fs::remove_all(dir);
}

TEST_CASE("patch sweep with an empty list is a usage error") {
  ExperimentSpec spec;
  spec.patch_counts.clear();
  spec.output_dir = scratch("patch_empty");
  CHECK_THROWS_AS(run_patch_sweep(spec), UsageError);
}

TEST_CASE("describe: empty arena at tick zero reports only the status clause") {
  const auto vocab = langgen::Vocabulary::from_bank(bank());
  DescribeRequest req;
  req.variant = 0;
  const auto r = describe_state(req, bank(), vocab);
  CHECK(r.state.tick == 0);
  CHECK(r.sentence == "you are standing in column 10");
  CHECK(r.token_ids.size() == 6);
  CHECK(r.seg_sums[0] == 0);
}

TEST_CASE("describe: fixed seed, tick and variant give a fixed sentence") {
  const auto vocab = langgen::Vocabulary::from_bank(bank());
  DescribeRequest req;
  req.seed = 3;
  req.tick = 20;
  req.variant = 0;
  const auto r = describe_state(req, bank(), vocab);
  CHECK(r.sentence ==
        "you are standing in column 10 i can see 1 demon to the right far away from here i can see 1 demon to the "
        "right at medium range from here i can see 1 demon to the right close by from here");
  CHECK(describe_state(req, bank(), vocab).sentence == r.sentence);

  req.variant.reset();
  const auto free = describe_state(req, bank(), vocab);
  std::ostringstream out;
  print_description(out, free, true);
  CHECK(out.str().find("variants:") != std::string::npos);
  CHECK(free.variants.size() == 1 + static_cast<std::size_t>(req.grid.n_dir * req.grid.n_dist));
  for (int v : free.variants) CHECK((v >= 0 && v < langgen::TemplateBank::kVariantCount));

  req.variant = langgen::TemplateBank::kVariantCount;
  CHECK_THROWS_AS(describe_state(req, bank(), vocab), UsageError);
}

TEST_CASE("describe writes the raw frame when asked") {
  const auto dir = scratch("frame");
  const auto vocab = langgen::Vocabulary::from_bank(bank());
  DescribeRequest req;
  req.seed = 1;
  req.tick = 5;
  req.frame_path = dir / "f.ppm";
  describe_state(req, bank(), vocab);
  const auto ppm = slurp(dir / "f.ppm");
  CHECK(ppm.rfind("P3\n", 0) == 0);
  fs::remove_all(dir);
}

TEST_CASE("svg renders every series and is deterministic") {
  Chart c;
  c.title = "demo";
  c.y_label = "reward";
  Panel p;
  p.title = "panel";
  p.series.push_back({"nl", {0, 10, 20}, {1, 2, 3}, {0.1, 0.2, 0.3}});
  p.series.push_back({"raw", {0, 10, 20}, {0, 1, 1}, {0, 0, 0}});
  c.panels = {p, p};
  std::ostringstream a;
  std::ostringstream b;
  write_svg(a, c);
  write_svg(b, c);
  CHECK(a.str() == b.str());
  CHECK(a.str().rfind("<svg", 0) == 0);
  int polylines = 0;
  for (std::size_t pos = 0; (pos = a.str().find("<polyline", pos)) != std::string::npos; ++pos) ++polylines;
  CHECK(polylines == 4);
}

TEST_CASE("a saved checkpoint can be evaluated") {
  const auto dir = scratch("eval");
  auto spec = tiny_grid(dir, "e");
  spec.representations = {agents::Representation::kNL};
  spec.seeds = {0};
  const auto r = run_grid(spec);
  REQUIRE(r.runs.size() == 1);
  const auto settings = resolve_run(spec, "DefendLine-mini", Algorithm::kPpo, agents::Representation::kNL, 0);
  const auto vocab = langgen::Vocabulary::from_bank(bank());
  const auto e1 = evaluate_checkpoint(settings, r.runs[0].checkpoint_path, 3, bank(), vocab);
  const auto e2 = evaluate_checkpoint(settings, r.runs[0].checkpoint_path, 3, bank(), vocab);
  CHECK(e1.episodes == 3);
  CHECK(std::isfinite(e1.mean_reward));
  CHECK(e1.mean_reward == e2.mean_reward);
  CHECK(e1.expert_reward > 0.0);
  const auto other = resolve_run(spec, "DefendLine-mini", Algorithm::kDqn, agents::Representation::kNL, 0);
  CHECK_THROWS(evaluate_checkpoint(other, r.runs[0].checkpoint_path, 1, bank(), vocab));
  fs::remove_all(dir);
}

TEST_CASE("mean_std uses the sample deviation") {
  const auto [m, s] = mean_std({1.0, 2.0, 3.0, 4.0});
  CHECK(m == doctest::Approx(2.5));
  CHECK(s == doctest::Approx(std::sqrt(5.0 / 3.0)));
  CHECK(mean_std({7.0}).second == 0.0);
}
