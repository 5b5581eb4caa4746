// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits 3 if any criterion fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "semrl/agents/arena_env.hpp"
#include "semrl/agents/corridor.hpp"
#include "semrl/agents/train.hpp"
#include "semrl/harness/runner.hpp"
#include "semrl/langgen/generator.hpp"
#include "semrl/langgen/measure.hpp"
#include "semrl/neural/gradcheck.hpp"
#include "semrl/neural/layers.hpp"

using namespace semrl;
using namespace semrl::agents;
using namespace semrl::harness;
namespace fs = std::filesystem;

namespace {

// Pinned tolerances and budgets.
constexpr double kGradRelTol = 1e-3;
constexpr double kGradSeconds = 60.0;
constexpr double kConvAtol = 1e-5;
constexpr double kGaeAtol = 1e-6;
constexpr double kLossAtol = 1e-6;
constexpr double kCorridorQTol = 1e-2;
constexpr std::int64_t kCorridorSteps = 50000;
constexpr double kExpertFraction = 0.9;
constexpr std::int64_t kPpoBudget = 200000;
constexpr std::int64_t kDqnBudget = 300000;
constexpr int kRequiredSeeds = 3;
constexpr int kOrderingNuisance = 40;
constexpr std::int64_t kOrderingSteps = 200000;
constexpr double kOrderingHours = 4.0;
constexpr std::int64_t kPatchSteps = 200000;
constexpr double kPatchSpreadPercent = 20.0;
constexpr int kGeneratorSamples = 10000;
constexpr double kLongSentenceWords = 250.0;
constexpr const char* kLongSentencePreset = "Super-crowded";

struct Outcome {
  bool pass = false;
  std::string summary;
  std::vector<std::string> details;
};

using D = nn::Tensor<double>;
using F = nn::Tensor<float>;

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::vector<float> randoms(std::size_t n, rng::Engine& e) {
  std::vector<float> v(n);
  for (auto& x : v) x = static_cast<float>(rng::uniform(e, -1.0, 1.0));
  return v;
}

const langgen::TemplateBank& bank() {
  static const auto b = langgen::TemplateBank::load_default();
  return b;
}

const langgen::Vocabulary& vocab() {
  static const auto v = langgen::Vocabulary::from_bank(bank());
  return v;
}

// ---------------------------------------------------------------- 1

Outcome gradient_suite() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto results = nn::run_gradcheck_suite(1);
  const double elapsed = seconds_since(t0);
  Outcome o;
  double worst = 0.0;
  std::string worst_name;
  bool text = false, image = false;
  for (const auto& r : results) {
    if (!(r.max_rel_error < kGradRelTol)) o.details.push_back("failed: " + r.name);
    if (r.max_rel_error > worst || worst_name.empty()) {
      worst = r.max_rel_error;
      worst_name = r.name;
    }
    text = text || r.name.rfind("text_cnn", 0) == 0;
    image = image || r.name.rfind("image_cnn", 0) == 0;
  }
  o.pass = o.details.empty() && text && image && elapsed < kGradSeconds && !results.empty();
  o.summary = std::to_string(results.size()) + " checks, worst rel err " + fmt("%.2e", worst) + " (" + worst_name +
              "), " + fmt("%.1f", elapsed) + " s";
  return o;
}

// ---------------------------------------------------------------- 2

std::vector<double> naive_conv2d(const F& x, const F& w, const F& b, int stride, int pad) {
  const int B = x.dim(0), C = x.dim(1), H = x.dim(2), W = x.dim(3), Fn = w.dim(0), K = w.dim(2);
  const int OH = (H + 2 * pad - K) / stride + 1, OW = (W + 2 * pad - K) / stride + 1;
  std::vector<double> out;
  for (int n = 0; n < B; ++n)
    for (int f = 0; f < Fn; ++f)
      for (int oy = 0; oy < OH; ++oy)
        for (int ox = 0; ox < OW; ++ox) {
          double acc = b.data()[f];
          for (int c = 0; c < C; ++c)
            for (int i = 0; i < K; ++i)
              for (int j = 0; j < K; ++j) {
                const int y = oy * stride - pad + i, xx = ox * stride - pad + j;
                if (y < 0 || y >= H || xx < 0 || xx >= W) continue;
                acc += double(x.data()[((n * C + c) * H + y) * W + xx]) * w.data()[((f * C + c) * K + i) * K + j];
              }
          out.push_back(acc);
        }
  return out;
}

std::vector<double> naive_conv1d(const F& x, const F& w, const F& b) {
  const int B = x.dim(0), L = x.dim(1), Dm = x.dim(2), Fn = w.dim(0), K = w.dim(1);
  std::vector<double> out;
  for (int n = 0; n < B; ++n)
    for (int t = 0; t + K <= L; ++t)
      for (int f = 0; f < Fn; ++f) {
        double acc = b.data()[f];
        for (int i = 0; i < K; ++i)
          for (int d = 0; d < Dm; ++d) acc += double(x.data()[(n * L + t + i) * Dm + d]) * w.data()[(f * K + i) * Dm + d];
        out.push_back(acc);
      }
  return out;
}

double max_abs_diff(const std::vector<float>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) return INFINITY;
  double m = 0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(double(a[i]) - b[i]));
  return m;
}

std::vector<double> direct_gae(const std::vector<double>& r, const std::vector<double>& v,
                               const std::vector<double>& nv, const std::vector<bool>& done, double g, double l) {
  std::vector<double> out(r.size(), 0.0);
  for (std::size_t t = 0; t < r.size(); ++t) {
    double coef = 1.0;
    for (std::size_t k = t; k < r.size(); ++k) {
      out[t] += coef * (r[k] + g * nv[k] - v[k]);
      if (done[k]) break;
      coef *= g * l;
    }
  }
  return out;
}

double log_sum_exp(const double* x, int n) {
  double m = x[0];
  for (int i = 1; i < n; ++i) m = std::max(m, x[i]);
  double s = 0.0;
  for (int i = 0; i < n; ++i) s += std::exp(x[i] - m);
  return m + std::log(s);
}

Observation random_features(int n, rng::Engine& e) {
  Observation o;
  for (int i = 0; i < n; ++i) o.features.push_back(static_cast<float>(rng::uniform(e, -1.0, 1.0)));
  return o;
}

Outcome brute_force() {
  Outcome o;
  rng::Engine e(101);
  double conv2 = 0.0, conv1 = 0.0;
  for (int trial = 0; trial < 10; ++trial) {
    const int stride = 1 + trial % 2, pad = trial % 3;
    auto x = F::from({2, 3, 7, 6}, randoms(252, e));
    auto w = F::from({4, 3, 3, 3}, randoms(108, e));
    auto b = F::from({4}, randoms(4, e));
    conv2 = std::max(conv2, max_abs_diff(nn::conv2d(x, w, b, stride, pad).data(), naive_conv2d(x, w, b, stride, pad)));
    auto s = F::from({3, 11, 5}, randoms(165, e));
    const int k = 1 + trial % 5;
    auto kw = F::from({6, k, 5}, randoms(static_cast<std::size_t>(30 * k), e));
    auto kb = F::from({6}, randoms(6, e));
    conv1 = std::max(conv1, max_abs_diff(nn::conv1d(s, kw, kb).data(), naive_conv1d(s, kw, kb)));
  }

  double gae_err = 0.0;
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<double> r, v, nv;
    std::vector<bool> d;
    for (int t = 0; t < 64; ++t) {
      r.push_back(rng::uniform(e, -1.0, 1.0));
      v.push_back(rng::uniform(e, -1.0, 1.0));
      d.push_back(rng::unit(e) < 0.1);
      nv.push_back(d.back() && rng::unit(e) < 0.5 ? 0.0 : rng::uniform(e, -1.0, 1.0));
    }
    const auto g = gae(r, v, nv, d, 0.99, 0.95);
    const auto want = direct_gae(r, v, nv, d, 0.99, 0.95);
    for (std::size_t t = 0; t < r.size(); ++t) gae_err = std::max(gae_err, std::abs(g.advantages[t] - want[t]));
  }

  double td_err = 0.0;
  {
    ObsSpec spec;
    spec.layout = ObsLayout::kFeatures;
    spec.sample_shape = {6};
    nn::EncoderSpec enc;
    enc.kind = nn::EncoderKind::kMlp;
    enc.inputs = 6;
    enc.hidden = {8};
    rng::Engine init(3);
    QNetwork<double> online(enc, 3, init, "q");
    QNetwork<double> target(enc, 3, init, "q");
    std::vector<Transition> store;
    for (int i = 0; i < 8; ++i) {
      store.push_back({random_features(6, e), rng::below(e, 3), static_cast<float>(rng::uniform(e, -2.0, 2.0)),
                       random_features(6, e), i % 3 == 0});
    }
    std::vector<const Transition*> batch;
    for (const auto& t : store) batch.push_back(&t);
    const double gamma = 0.97;
    double expected = 0.0;
    for (const auto& t : store) {
      const auto q = online.forward(make_batch(spec, {&t.obs})).data();
      const auto qn = target.forward(make_batch(spec, {&t.next_obs})).data();
      const double y = t.terminal ? t.reward : t.reward + gamma * std::max({qn[0], qn[1], qn[2]});
      expected += (y - q[static_cast<std::size_t>(t.action)]) * (y - q[static_cast<std::size_t>(t.action)]);
    }
    td_err = std::abs(dqn_td_loss(batch, online, target, spec, gamma).item() - expected / 8.0);
  }

  double ppo_err = 0.0;
  {
    const int b = 8, a = 3;
    std::vector<double> lg, vals, lpo, adv, ret;
    std::vector<int> act;
    for (int i = 0; i < b * a; ++i) lg.push_back(rng::uniform(e, -2.0, 2.0));
    for (int i = 0; i < b; ++i) {
      vals.push_back(rng::uniform(e, -1.0, 1.0));
      act.push_back(rng::below(e, a));
      lpo.push_back(lg[i * a + act.back()] - log_sum_exp(&lg[i * a], a) + rng::uniform(e, -0.5, 0.5));
      adv.push_back(rng::uniform(e, -2.0, 2.0));
      ret.push_back(rng::uniform(e, -1.0, 1.0));
    }
    const double eps = 0.2, vf = 0.5, ent = 0.01;
    const auto l = ppo_loss(D::from({b, a}, lg), D::from({b}, vals), act, lpo, adv, ret, eps, vf, ent);
    double obj = 0.0, mse = 0.0, h = 0.0;
    for (int i = 0; i < b; ++i) {
      const double lse = log_sum_exp(&lg[i * a], a);
      const double ratio = std::exp(lg[i * a + act[i]] - lse - lpo[i]);
      const double clipped = std::min(std::max(ratio, 1.0 - eps), 1.0 + eps);
      obj += std::min(ratio * adv[i], clipped * adv[i]);
      mse += (vals[i] - ret[i]) * (vals[i] - ret[i]);
      for (int j = 0; j < a; ++j) {
        const double lp = lg[i * a + j] - lse;
        h -= std::exp(lp) * lp;
      }
    }
    ppo_err = std::abs(l.total.item() - (-obj / b + vf * mse / b - ent * h / b));
  }

  o.pass = conv2 < kConvAtol && conv1 < kConvAtol && gae_err < kGaeAtol && td_err < kLossAtol && ppo_err < kLossAtol;
  o.summary = "conv2d " + fmt("%.1e", conv2) + ", conv1d " + fmt("%.1e", conv1) + ", gae " + fmt("%.1e", gae_err) +
              ", td " + fmt("%.1e", td_err) + ", ppo " + fmt("%.1e", ppo_err);
  return o;
}

// ---------------------------------------------------------------- 3

Outcome corridor() {
  Outcome o;
  int good = 0;
  double worst = 0.0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    CorridorEnv env;
    DqnConfig cfg;
    cfg.gamma = 0.9;
    cfg.learning_starts = 100;
    nn::EncoderSpec lin;
    lin.kind = nn::EncoderKind::kMlp;
    DqnAgent agent(env.spec(), 2, encoder_for(env.spec(), lin), cfg, seed);
    TrainOptions opt;
    opt.total_steps = kCorridorSteps;
    opt.seed = seed;
    train_dqn(agent, env, opt);
    const auto q = corridor_q_star(env, cfg.gamma);
    double err = 0.0;
    for (int s = 0; s < env.goal(); ++s) {
      const auto v = agent.q_values(env.encode(s));
      for (int a = 0; a < 2; ++a) err = std::max(err, std::abs(v[static_cast<std::size_t>(a)] - q[s][a]));
    }
    worst = std::max(worst, err);
    good += err < kCorridorQTol;
    o.details.push_back("seed " + std::to_string(seed) + ": max |Q - Q*| = " + fmt("%.2e", err));
  }
  o.pass = good == 5;
  o.summary = std::to_string(good) + "/5 seeds within " + fmt("%.0e", kCorridorQTol) + " after " +
              std::to_string(kCorridorSteps) + " steps (worst " + fmt("%.2e", worst) + ")";
  return o;
}

// ---------------------------------------------------------------- 4

ExperimentSpec base_spec(const fs::path& out, const std::string& name) {
  ExperimentSpec s;
  s.name = name;
  s.output_dir = out;
  s.seeds = {0, 1, 2, 3, 4};
  return s;
}

Outcome learnability(const fs::path& out) {
  Outcome o;
  bool all = true;
  std::string summary;
  for (auto [alg, budget] : {std::pair{Algorithm::kPpo, kPpoBudget}, std::pair{Algorithm::kDqn, kDqnBudget}}) {
    auto spec = base_spec(out, std::string("learnability_") + std::string(to_string(alg)));
    spec.scenarios = {"DefendLine-mini"};
    spec.algorithms = {alg};
    spec.representations = {Representation::kNL};
    spec.total_steps = budget;
    spec.expert_fraction = kExpertFraction;
    const auto r = run_grid(spec);
    int reached = 0;
    for (const auto& run : r.runs) {
      const bool ok = !run.failed() && run.final_reward >= kExpertFraction * run.expert_reward;
      reached += ok;
      o.details.push_back(std::string(to_string(alg)) + " seed " + std::to_string(run.seed) + ": " +
                          fmt("%.2f", run.final_reward) + " vs expert " + fmt("%.2f", run.expert_reward) + " at " +
                          std::to_string(run.steps) + " steps" + (ok ? "" : " (not reached)"));
    }
    all = all && reached >= kRequiredSeeds;
    if (!summary.empty()) summary += "; ";
    summary += std::string(to_string(alg)) + " " + std::to_string(reached) + "/5 seeds >= " +
               fmt("%.1f", kExpertFraction) + " x expert within " + std::to_string(budget) + " steps";
  }
  o.pass = all;
  o.summary = summary;
  return o;
}

// ---------------------------------------------------------------- 5

Outcome ordering(const fs::path& out) {
  Outcome o;
  auto spec = base_spec(out, "ordering");
  spec.scenarios = {"Super-mini"};
  spec.algorithms = {Algorithm::kPpo, Algorithm::kDqn};
  spec.total_steps = kOrderingSteps;
  spec.arena.set("nuisance_count", std::to_string(kOrderingNuisance));
  const auto t0 = std::chrono::steady_clock::now();
  const auto r = run_grid(spec);
  const double hours = seconds_since(t0) / 3600.0;
  bool any = false;
  std::string summary;
  for (auto alg : spec.algorithms) {
    std::map<Representation, std::vector<double>> finals;
    for (const auto& run : r.runs) {
      if (run.algorithm == alg) finals[run.representation].push_back(run.final_reward);
    }
    const double raw = mean_std(finals[Representation::kRaw]).first;
    const double seg = mean_std(finals[Representation::kSeg]).first;
    const double nl = mean_std(finals[Representation::kNL]).first;
    const bool holds = nl >= seg && seg >= raw;
    any = any || holds;
    if (!summary.empty()) summary += "; ";
    summary += std::string(to_string(alg)) + " nl " + fmt("%.2f", nl) + " seg " + fmt("%.2f", seg) + " raw " +
               fmt("%.2f", raw) + (holds ? " (ordered)" : " (not ordered)");
    for (auto rep : spec.representations) {
      const auto [m, s] = mean_std(finals[rep]);
      o.details.push_back(std::string(to_string(alg)) + " " + std::string(to_string(rep)) + ": " + fmt("%.2f", m) +
                          " +- " + fmt("%.2f", s));
    }
  }
  o.details.push_back("failed runs: " + std::to_string(r.failures) + ", output " + r.root.string());
  o.pass = any && r.failures == 0 && hours <= kOrderingHours;
  o.summary = summary + "; " + fmt("%.2f", hours) + " h";
  return o;
}

// ---------------------------------------------------------------- 6

Outcome patches(const fs::path& out) {
  Outcome o;
  auto spec = base_spec(out, "patches");
  spec.scenarios = {"Super-mini"};
  spec.algorithms = {Algorithm::kPpo};
  spec.representations = {Representation::kNL};
  spec.total_steps = kPatchSteps;
  spec.patch_counts = {3, 7, 15, 31};
  const auto r = run_patch_sweep(spec);
  double words3 = 0.0, words31 = 0.0;
  std::int64_t truncations = 0;
  for (const auto& row : r.table) {
    if (row.n_dir == 3) words3 = row.mean_words;
    if (row.n_dir == 31) words31 = row.mean_words;
    truncations += row.truncations;
    o.details.push_back("n_dir " + std::to_string(row.n_dir) + ": " + fmt("%.2f", row.final_mean) + " +- " +
                        fmt("%.2f", row.final_std) + ", " + fmt("%.1f", row.mean_words) + " words, L_max " +
                        std::to_string(row.token_length) + ", truncations " + std::to_string(row.truncations));
  }
  const double spread = r.spread_percent.empty() ? INFINITY : r.spread_percent.front();
  o.pass = r.failures == 0 && r.table.size() == 4 && spread <= kPatchSpreadPercent && words31 > words3 &&
           truncations == 0;
  o.summary = "spread " + fmt("%.1f", spread) + "% of best, words " + fmt("%.1f", words3) + " (3) vs " +
              fmt("%.1f", words31) + " (31), truncations " + std::to_string(truncations);
  return o;
}

// ---------------------------------------------------------------- 7

// Sparse random summary: most patches empty, counts spread over 1..99.
langgen::SceneSummary random_scene(const langgen::PatchGrid& grid, rng::Engine& eng) {
  observe::ObjectList empty;
  empty.width = 21;
  empty.height = 15;
  empty.agent_col = rng::below(eng, 99);
  empty.agent_row = 14;
  auto s = langgen::summarize(empty, grid);
  for (auto& p : s.patches) {
    for (auto& c : p.counts) {
      const int r = rng::below(eng, 10);
      c = r < 7 ? 0 : (r < 9 ? 1 + rng::below(eng, 5) : 1 + rng::below(eng, 99));
    }
  }
  return s;
}

Outcome generator_properties() {
  Outcome o;
  const langgen::PatchGrid grid{3, 3};

  rng::Engine scenes(41);
  auto amb = rng::make_engine(42, rng::Stream::kAmbiguity);
  int roundtrip_fail = 0;
  std::set<int> used;
  for (int i = 0; i < kGeneratorSamples; ++i) {
    const auto s = random_scene(grid, scenes);
    const auto d = langgen::describe(s, grid, bank(), amb, i % langgen::TemplateBank::kVariantCount);
    used.insert(d.variants.front());
    roundtrip_fail += langgen::parse_description(d.words, grid, bank()) != s;
  }

  // Sentences from real arena states under a random policy.
  const auto cfg = world::preset(kLongSentencePreset);
  world::Arena arena(cfg);
  auto act = rng::make_engine(43, rng::Stream::kExploration);
  auto amb2 = rng::make_engine(44, rng::Stream::kAmbiguity);
  long oov = 0, words = 0;
  std::uint64_t episode = 0;
  auto st = arena.reset(episode);
  for (int i = 0; i < kGeneratorSamples; ++i) {
    const auto d = langgen::describe(langgen::summarize(observe::extract_objects(st), grid), grid, bank(), amb2);
    for (const auto& w : d.words) oov += !vocab().contains(w);
    words += static_cast<long>(d.words.size());
    st = arena.step(st, static_cast<world::Action>(rng::below(act, world::kNumActions))).state;
    if (st.terminal) st = arena.reset(++episode);
  }

  // PAD-neutrality through the full policy/value network on real observations.
  ArenaEnvConfig ec;
  ec.arena = world::preset("DefendLine-mini");
  ec.representation = Representation::kNL;
  ArenaEnv env(ec, bank(), vocab());
  std::vector<Observation> obs{env.reset(7)};
  for (int i = 0; i < 40; ++i) {
    auto s = env.step(i % env.num_actions());
    if (s.terminal || s.truncated) break;
    obs.push_back(s.obs);
  }
  std::vector<const Observation*> ptrs;
  for (const auto& x : obs) ptrs.push_back(&x);
  rng::Engine init(45);
  const auto spec = env.spec();
  PolicyValueNet<float> net(encoder_for(spec, nn::EncoderSpec{}), env.num_actions(), false, init);
  rng::Engine jitter(46);
  for (auto& p : net.parameters()) {
    if (p.name().ends_with(".b")) {
      for (auto& v : p.data()) v = static_cast<float>(rng::uniform(jitter, -0.5, 0.5));
    }
  }
  const auto base = net.forward(make_batch(spec, ptrs));
  double pad_delta = 0.0;
  for (int extra : {1, 16, 300}) {
    auto longer = spec;
    longer.token_length += extra;
    const auto padded = net.forward(make_batch(longer, ptrs));
    for (std::size_t i = 0; i < base.logits.data().size(); ++i) {
      pad_delta = std::max(pad_delta, double(std::abs(padded.logits.data()[i] - base.logits.data()[i])));
    }
    for (std::size_t i = 0; i < base.values.data().size(); ++i) {
      pad_delta = std::max(pad_delta, double(std::abs(padded.values.data()[i] - base.values.data()[i])));
    }
  }

  const auto long_stats = langgen::measure_length(cfg, grid, bank(), 3, 1, langgen::RolloutPolicy::kRandom);

  o.pass = roundtrip_fail == 0 && used.size() == static_cast<std::size_t>(langgen::TemplateBank::kVariantCount) &&
           oov == 0 && pad_delta == 0.0 && long_stats.mean_words >= kLongSentenceWords;
  o.summary = "round-trip failures " + std::to_string(roundtrip_fail) + "/" + std::to_string(kGeneratorSamples) +
              " over " + std::to_string(used.size()) + " variants, OOV " + std::to_string(oov) + "/" +
              std::to_string(words) + " words, pad delta " + fmt("%g", pad_delta) + ", " +
              fmt("%.1f", long_stats.mean_words) + " words/state at " + kLongSentencePreset;
  o.details.push_back(std::string(kLongSentencePreset) + ": nuisance " + std::to_string(cfg.nuisance_count) + ", " +
                      std::to_string(long_stats.states) + " states, max " + std::to_string(long_stats.max_words) +
                      " words");
  return o;
}

// ---------------------------------------------------------------- 8

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Outcome determinism(const fs::path& out) {
  Outcome o;
  auto spec = base_spec(out, "determinism_a");
  spec.scenarios = {"DefendLine-mini", "Super-mini"};
  spec.algorithms = {Algorithm::kPpo, Algorithm::kDqn};
  spec.seeds = {0, 1};
  spec.total_steps = 4000;
  spec.dqn.learning_starts = 500;
  const auto a = run_grid(spec);
  spec.name = "determinism_b";
  spec.workers = 2;
  const auto b = run_grid(spec);
  const auto agg_a = slurp(a.aggregate_csv), agg_b = slurp(b.aggregate_csv);
  bool curves = a.runs.size() == b.runs.size();
  for (std::size_t i = 0; curves && i < a.runs.size(); ++i) {
    curves = slurp(a.runs[i].curve_path) == slurp(b.runs[i].curve_path);
  }
  o.pass = !agg_a.empty() && agg_a == agg_b && slurp(a.summary_csv) == slurp(b.summary_csv) && curves &&
           a.failures == 0 && b.failures == 0;
  o.summary = std::to_string(a.runs.size()) + " runs twice (1 then 2 workers): aggregate " +
              std::to_string(agg_a.size()) + " bytes " + (agg_a == agg_b ? "identical" : "DIFFERENT") +
              ", per-run curves " + (curves ? "identical" : "DIFFERENT");
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance checks"};
  std::vector<int> only;
  std::string out = "acceptance";
  bool verbose = true;
  app.add_option("--only", only, "criterion numbers to run (default all)")->delimiter(',');
  app.add_option("-o,--out", out, "output directory for training runs");
  app.add_flag("!--quiet", verbose, "omit per-criterion details");
  CLI11_PARSE(app, argc, argv);

  const fs::path root = resolve_output(out);
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"gradient oracle suite", gradient_suite},
      {"brute-force equivalence", brute_force},
      {"corridor optimality", corridor},
      {"learnability on DefendLine-mini", [&] { return learnability(root); }},
      {"representation ordering under nuisance", [&] { return ordering(root); }},
      {"patch-count insensitivity", [&] { return patches(root); }},
      {"generator properties", generator_properties},
      {"determinism", [&] { return determinism(root); }},
  };

  fs::create_directories(root);
  std::ofstream report(root / "report.txt");
  auto emit = [&report](const std::string& line) {
    std::cout << line << "\n" << std::flush;
    report << line << "\n" << std::flush;
  };

  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!only.empty() && std::find(only.begin(), only.end(), id) == only.end()) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o.pass = false;
      o.summary = std::string("error: ") + e.what();
    }
    failed += !o.pass;
    emit(std::string(o.pass ? "PASS" : "FAIL") + " [" + std::to_string(id) + "] " + criteria[i].first + ": " +
         o.summary + " (" + fmt("%.0f", seconds_since(t0)) + " s)");
    if (verbose) {
      for (const auto& d : o.details) emit("       " + d);
    }
  }
  return failed == 0 ? 0 : 3;
}
