#include "semrl/harness/inspect.hpp"

#include <fstream>
#include <ostream>

#include "semrl/core/error.hpp"
#include "semrl/harness/runner.hpp"
#include "semrl/neural/checkpoint.hpp"

namespace semrl::harness {

DescribeResult describe_state(const DescribeRequest& req, const langgen::TemplateBank& bank,
                              const langgen::Vocabulary& vocab) {
  const auto cfg = world::preset(req.scenario);
  if (req.tick < 0 || req.tick > cfg.max_ticks) {
    throw UsageError("tick must be in [0, " + std::to_string(cfg.max_ticks) + "]");
  }
  if (req.variant && (*req.variant < 0 || *req.variant >= langgen::TemplateBank::kVariantCount)) {
    throw UsageError("variant must be in [0, " + std::to_string(langgen::TemplateBank::kVariantCount - 1) + "]");
  }
  req.grid.validate();
  bank.check_supports(req.grid);
  world::Arena arena(cfg);
  DescribeResult r;
  r.state = arena.reset(req.seed);
  while (r.state.tick < req.tick) {
    if (r.state.terminal) throw UsageError("the episode ended at tick " + std::to_string(r.state.tick));
    r.state = arena.step(r.state, world::Action::kNoop).state;
  }
  auto ambiguity = rng::make_engine(req.seed, rng::Stream::kAmbiguity);
  const auto scene = langgen::summarize(observe::extract_objects(r.state), req.grid);
  const auto d = langgen::describe(scene, req.grid, bank, ambiguity, req.variant);
  r.sentence = langgen::join(d.words);
  r.variants = d.variants;
  const auto seq = langgen::tokenize(d.words, vocab, langgen::max_sentence_length(bank, req.grid));
  r.token_ids.assign(seq.ids.begin(), seq.ids.begin() + seq.true_length);
  const auto seg = observe::render_seg(r.state);
  for (int c = 0; c < observe::kSegChannels; ++c) r.seg_sums[c] = seg.channel_sum(c);
  if (!req.frame_path.empty()) {
    if (req.frame_path.has_parent_path()) std::filesystem::create_directories(req.frame_path.parent_path());
    std::ofstream out(req.frame_path, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + req.frame_path.string());
    observe::write_ppm(out, observe::render_raw(r.state, rng::derive(req.seed, rng::Stream::kTexture)));
    r.frame_path = req.frame_path;
  }
  return r;
}

void print_description(std::ostream& out, const DescribeResult& r, bool show_variants) {
  out << "tick " << r.state.tick << " column " << r.state.agent_col << " health " << r.state.health() << " ammo "
      << r.state.ammo << "\n";
  out << "sentence: " << r.sentence << "\n";
  if (show_variants) {
    out << "variants:";
    for (int v : r.variants) out << ' ' << v;
    out << "\n";
  }
  out << "tokens (" << r.token_ids.size() << "):";
  for (int t : r.token_ids) out << ' ' << t;
  out << "\nseg channel sums:";
  for (int c = 0; c < observe::kSegChannels; ++c) {
    out << ' ' << (c == observe::kAgentChannel ? std::string("agent")
                                                : std::string(world::to_string(static_cast<world::EntityClass>(c))))
        << '=' << r.seg_sums[c];
  }
  out << "\n";
  if (!r.frame_path.empty()) out << "frame: " << r.frame_path.string() << "\n";
}

EvalResult evaluate_checkpoint(const RunSettings& s, const std::filesystem::path& checkpoint, int episodes,
                               const langgen::TemplateBank& bank, const langgen::Vocabulary& vocab) {
  if (episodes < 1) throw UsageError("evaluation needs at least one episode");
  agents::ArenaEnvConfig ec;
  ec.arena = s.arena;
  ec.representation = s.representation;
  ec.grid = s.grid;
  ec.token_length = s.token_length;
  ec.seed = s.seed;
  agents::ArenaEnv env(ec, bank, vocab);
  const auto enc = agents::encoder_for(env.spec(), s.encoder);
  const std::uint64_t vh = s.representation == agents::Representation::kNL ? vocab.hash() : 0;
  // Evaluation episodes use seeds disjoint from training.
  const std::uint64_t eval_seed = rng::derive(s.seed, 0xE7A1);
  std::vector<double> rewards;
  auto roll = [&](auto&& act) {
    for (int e = 0; e < episodes; ++e) {
      auto obs = env.reset(agents::episode_seed(eval_seed, e));
      double total = 0.0;
      while (true) {
        auto st = env.step(act(obs));
        total += st.reward;
        if (st.terminal || st.truncated) break;
        obs = std::move(st.obs);
      }
      rewards.push_back(total);
    }
  };
  if (s.algorithm == Algorithm::kDqn) {
    agents::DqnAgent agent(env.spec(), env.num_actions(), enc, s.dqn, s.seed);
    auto params = agent.parameters();
    nn::load_checkpoint(checkpoint, params, vh);
    roll([&](const agents::Observation& o) { return agent.act(o, 0.0); });
  } else {
    agents::PpoAgent agent(env.spec(), env.num_actions(), enc, s.ppo, s.seed);
    auto params = agent.parameters();
    nn::load_checkpoint(checkpoint, params, vh);
    roll([&](const agents::Observation& o) { return agent.act(o).action; });
  }
  EvalResult r;
  r.episodes = episodes;
  std::tie(r.mean_reward, r.std_reward) = mean_std(rewards);
  r.expert_reward = expert_mean_reward(s.arena, episodes);
  return r;
}

}  // namespace semrl::harness
