#include "semrl/agents/train.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "semrl/core/error.hpp"
#include "semrl/neural/checkpoint.hpp"

namespace semrl::agents {

namespace {

// Per-episode bookkeeping shared by both loops.
class EpisodeLog {
 public:
  explicit EpisodeLog(const TrainOptions& opt) : opt_(opt) {}

  void add(double r) { reward_ += r; }
  // Closes the episode; returns true when the early-stop target is met.
  bool close(std::int64_t step, double aux) {
    rewards_.push_back(reward_);
    window_sum_ += reward_;
    if (rewards_.size() > static_cast<std::size_t>(kMovingWindow)) {
      window_sum_ -= rewards_[rewards_.size() - kMovingWindow - 1];
    }
    const std::size_t n = std::min(rewards_.size(), static_cast<std::size_t>(kMovingWindow));
    CurveRow row{step, static_cast<std::int64_t>(rewards_.size()) - 1, reward_, window_sum_ / static_cast<double>(n), aux};
    curve.push_back(row);
    reward_ = 0.0;
    return !std::isnan(opt_.stop_reward) && n == static_cast<std::size_t>(kMovingWindow) &&
           row.moving_avg >= opt_.stop_reward;
  }
  std::int64_t episodes() const { return static_cast<std::int64_t>(rewards_.size()); }

  std::vector<CurveRow> curve;

 private:
  const TrainOptions& opt_;
  std::vector<double> rewards_;
  double reward_ = 0.0;
  double window_sum_ = 0.0;
};

void save_if_requested(const TrainOptions& opt, const std::vector<nn::Tensor<float>>& params, bool diverged) {
  if (opt.checkpoint.empty()) return;
  auto path = opt.checkpoint;
  if (diverged) path += ".diverged";
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  nn::save_checkpoint(path, params, opt.vocab_hash);
}

}  // namespace

std::uint64_t episode_seed(std::uint64_t run_seed, std::int64_t episode) {
  return rng::derive(rng::derive(run_seed, rng::Stream::kEpisode), static_cast<std::uint64_t>(episode));
}

TrainResult train_dqn(DqnAgent& agent, Environment& env, const TrainOptions& opt) {
  TrainResult res;
  EpisodeLog log(opt);
  const auto& cfg = agent.config();
  try {
    Observation obs;
    if (opt.total_steps > 0) obs = env.reset(episode_seed(opt.seed, 0));
    for (std::int64_t t = 0; t < opt.total_steps; ++t) {
      const double eps = epsilon_at(cfg, t);
      const int a = agent.act(obs, eps);
      auto st = env.step(a);
      log.add(st.reward);
      const bool ended = st.terminal || st.truncated;
      Observation next = st.obs;
      agent.remember({std::move(obs), a, static_cast<float>(st.reward), std::move(st.obs), st.terminal});
      res.steps = t + 1;
      if (t >= cfg.learning_starts && (t + 1) % cfg.train_freq == 0 &&
          agent.buffer().size() >= static_cast<std::size_t>(cfg.batch)) {
        agent.update();
      }
      if ((t + 1) % cfg.target_update == 0) agent.sync_target();
      if (ended) {
        if (log.close(t + 1, eps)) {
          res.stopped_early = true;
          break;
        }
        obs = env.reset(episode_seed(opt.seed, log.episodes()));
      } else {
        obs = std::move(next);
      }
    }
  } catch (const TrainingError& e) {
    res.diverged = true;
    res.failure = e.what();
  }
  res.curve = std::move(log.curve);
  res.updates = agent.updates();
  save_if_requested(opt, agent.parameters(), res.diverged);
  return res;
}

TrainResult train_ppo(PpoAgent& agent, Environment& env, const TrainOptions& opt) {
  TrainResult res;
  EpisodeLog log(opt);
  const auto& cfg = agent.config();
  double last_clip = 0.0;
  try {
    Observation obs;
    if (opt.total_steps > 0) obs = env.reset(episode_seed(opt.seed, 0));
    Rollout ro;
    bool stop = false;
    std::int64_t t = 0;
    while (t < opt.total_steps && !stop) {
      ro.clear();
      const std::int64_t len = std::min<std::int64_t>(cfg.rollout, opt.total_steps - t);
      for (std::int64_t i = 0; i < len; ++i, ++t) {
        const auto s = agent.act(obs);
        auto st = env.step(s.action);
        log.add(st.reward);
        const bool ended = st.terminal || st.truncated;
        ro.obs.push_back(std::move(obs));
        ro.actions.push_back(s.action);
        ro.logp.push_back(s.logp);
        ro.values.push_back(s.value);
        ro.rewards.push_back(st.reward);
        ro.dones.push_back(ended);
        // Bootstrap past a time-limit cut or the rollout boundary.
        const bool bootstrap = !st.terminal && (ended || i + 1 == len);
        ro.next_values.push_back(bootstrap ? agent.value(st.obs) : 0.0);
        if (ended) {
          if (log.close(t + 1, last_clip)) {
            stop = true;
            ++t;
            break;
          }
          obs = env.reset(episode_seed(opt.seed, log.episodes()));
        } else {
          obs = std::move(st.obs);
        }
      }
      // Consecutive non-final steps take the next step's stored value.
      for (std::size_t k = 0; k + 1 < ro.size(); ++k) {
        if (!ro.dones[k]) ro.next_values[k] = ro.values[k + 1];
      }
      res.steps = t;
      if (!stop) last_clip = agent.update(ro).clip_fraction;
    }
    if (stop) res.stopped_early = true;
  } catch (const TrainingError& e) {
    res.diverged = true;
    res.failure = e.what();
  }
  res.curve = std::move(log.curve);
  res.updates = agent.updates();
  save_if_requested(opt, agent.parameters(), res.diverged);
  return res;
}

double tail_mean(const std::vector<CurveRow>& curve, int window) {
  if (curve.empty()) return 0.0;
  const std::size_t n = std::min(curve.size(), static_cast<std::size_t>(window));
  double s = 0.0;
  for (std::size_t i = curve.size() - n; i < curve.size(); ++i) s += curve[i].reward;
  return s / static_cast<double>(n);
}

void write_curve_csv(std::ostream& out, const std::vector<CurveRow>& curve) {
  out << "step,episode,reward,moving_avg_100,epsilon_or_clipfrac\n";
  for (const auto& r : curve) {
    out << r.step << ',' << r.episode << ',' << format_number(r.reward) << ',' << format_number(r.moving_avg) << ','
        << format_number(r.aux) << '\n';
  }
}

void write_curve_csv(const std::filesystem::path& path, const std::vector<CurveRow>& curve) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path.string());
  write_curve_csv(out, curve);
}

std::vector<CurveRow> read_curve_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read " + path.string());
  std::string line;
  std::getline(in, line);
  std::vector<CurveRow> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split(line, ',');
    if (f.size() != 5) throw CorruptionError("malformed curve row in " + path.string() + ": " + line);
    out.push_back({std::stoll(f[0]), std::stoll(f[1]), std::stod(f[2]), std::stod(f[3]), std::stod(f[4])});
  }
  return out;
}

}  // namespace semrl::agents
