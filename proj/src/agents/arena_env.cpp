#include "semrl/agents/arena_env.hpp"

#include <string>

#include "semrl/core/error.hpp"
#include "semrl/observe/observe.hpp"

namespace semrl::agents {

std::string_view to_string(Representation r) {
  switch (r) {
    case Representation::kRaw: return "raw";
    case Representation::kSeg: return "seg";
    case Representation::kNL: return "nl";
  }
  return "?";
}

Representation parse_representation(std::string_view name) {
  if (name == "raw") return Representation::kRaw;
  if (name == "seg") return Representation::kSeg;
  if (name == "nl") return Representation::kNL;
  throw ConfigError("unknown representation '" + std::string(name) + "' (raw, seg, nl)");
}

ArenaEnv::ArenaEnv(const ArenaEnvConfig& cfg, langgen::TemplateBank bank, langgen::Vocabulary vocab)
    : cfg_(cfg),
      arena_(cfg.arena),
      bank_(std::move(bank)),
      vocab_(std::move(vocab)),
      ambiguity_(rng::make_engine(cfg.seed, rng::Stream::kAmbiguity)),
      texture_master_(rng::derive(cfg.seed, rng::Stream::kTexture)) {
  const int h = cfg.arena.height, w = cfg.arena.width;
  switch (cfg.representation) {
    case Representation::kRaw:
      spec_.layout = ObsLayout::kImage;
      spec_.sample_shape = {3, h, w};
      spec_.byte_scale = 1.0f / 255.0f;
      break;
    case Representation::kSeg:
      spec_.layout = ObsLayout::kImage;
      spec_.sample_shape = {observe::kSegChannels, h, w};
      break;
    case Representation::kNL:
      cfg_.grid.validate();
      bank_.check_supports(cfg_.grid);
      spec_.layout = ObsLayout::kTokens;
      spec_.token_length = cfg.token_length > 0 ? cfg.token_length : langgen::max_sentence_length(bank_, cfg_.grid);
      spec_.vocab_size = vocab_.size();
      break;
  }
}

Observation ArenaEnv::reset(std::uint64_t seed) {
  state_ = arena_.reset(seed);
  return observe();
}

EnvStep ArenaEnv::step(int action) {
  if (action < 0 || action >= world::kNumActions) throw UsageError("action " + std::to_string(action) + " out of range");
  auto r = arena_.step(state_, static_cast<world::Action>(action));
  state_ = std::move(r.state);
  EnvStep out;
  out.reward = r.reward;
  out.terminal = r.terminal && state_.health_halves == 0;
  out.truncated = r.terminal && !out.terminal;
  out.obs = observe();
  return out;
}

Observation ArenaEnv::observe() {
  Observation o;
  switch (cfg_.representation) {
    case Representation::kRaw: {
      const auto frame = observe::render_raw(state_, rng::derive(texture_master_, frames_++));
      const int h = frame.height, w = frame.width;
      o.bytes.resize(frame.pixels.size());
      // HWC -> CHW
      for (int c = 0; c < 3; ++c) {
        for (int i = 0; i < h * w; ++i) o.bytes[static_cast<std::size_t>(c * h * w + i)] = frame.pixels[i * 3 + c];
      }
      break;
    }
    case Representation::kSeg:
      o.bytes = observe::render_seg(state_).data;
      break;
    case Representation::kNL: {
      const auto scene = langgen::summarize(observe::extract_objects(state_), cfg_.grid);
      const auto words = langgen::describe(scene, cfg_.grid, bank_, ambiguity_).words;
      const auto seq = langgen::tokenize(words, vocab_, spec_.token_length);
      o.tokens.assign(seq.ids.begin(), seq.ids.begin() + seq.true_length);
      ++sentences_;
      words_ += static_cast<std::int64_t>(words.size());
      if (seq.truncated) ++truncations_;
      break;
    }
  }
  return o;
}

}  // namespace semrl::agents
