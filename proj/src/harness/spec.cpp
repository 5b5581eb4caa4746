#include "semrl/harness/spec.hpp"

#include <cstdlib>
#include <set>
#include <sstream>

#include "semrl/core/error.hpp"
#include "semrl/core/hash.hpp"

#ifndef SEMRL_VERSION
#define SEMRL_VERSION "dev"
#endif

namespace semrl::harness {

namespace {

using agents::Representation;

constexpr Representation kAllReps[] = {Representation::kRaw, Representation::kSeg, Representation::kNL};

template <typename T, typename F>
std::string join_list(const std::vector<T>& items, F&& fmt) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += ',';
    out += fmt(items[i]);
  }
  return out;
}

std::vector<std::string> list_of(const KvConfig& kv, const std::string& key, std::vector<std::string> fallback) {
  const auto v = kv.get(key);
  if (!v) return fallback;
  std::vector<std::string> out;
  for (const auto& item : split(*v, ',')) {
    const auto t = trim(item);
    if (!t.empty()) out.push_back(t);
  }
  return out;
}

std::vector<int> int_list_of(const KvConfig& kv, const std::string& key, const std::vector<int>& fallback) {
  if (!kv.has(key)) return fallback;
  std::vector<int> out;
  for (const auto& item : list_of(kv, key, {})) {
    KvConfig one;
    one.set(key, item);
    out.push_back(static_cast<int>(one.get_int(key, 0)));
  }
  return out;
}

std::string rep_prefix(Representation r) { return std::string(agents::to_string(r)) + "."; }

// Keys that do not influence results and so stay out of the hash.
bool bookkeeping(const std::string& key) { return key == "name" || key == "workers" || key == "output_dir"; }

}  // namespace

std::string_view to_string(Algorithm a) { return a == Algorithm::kDqn ? "dqn" : "ppo"; }

Algorithm parse_algorithm(std::string_view name) {
  if (name == "dqn") return Algorithm::kDqn;
  if (name == "ppo") return Algorithm::kPpo;
  throw ConfigError("unknown algorithm '" + std::string(name) + "' (dqn, ppo)");
}

std::string_view code_version() { return SEMRL_VERSION; }

ExperimentSpec ExperimentSpec::from_kv(const KvConfig& kv) {
  ExperimentSpec s;
  KvConfig shared;
  for (const auto& [k, v] : kv.values()) {
    bool scoped = false;
    for (auto r : kAllReps) {
      const auto p = rep_prefix(r);
      if (k.rfind(p, 0) == 0) {
        s.overrides[r].set(k.substr(p.size()), v);
        scoped = true;
      }
    }
    if (scoped) continue;
    if (k.rfind("arena.", 0) == 0) {
      s.arena.set(k.substr(6), v);
    } else {
      shared.set(k, v);
    }
  }
  s.name = shared.get_string("name", s.name);
  s.scenarios = list_of(shared, "scenarios", s.scenarios);
  if (shared.has("algorithms")) {
    s.algorithms.clear();
    for (const auto& a : list_of(shared, "algorithms", {})) s.algorithms.push_back(parse_algorithm(a));
  }
  if (shared.has("representations")) {
    s.representations.clear();
    for (const auto& r : list_of(shared, "representations", {})) {
      s.representations.push_back(agents::parse_representation(r));
    }
  }
  if (shared.has("seeds")) {
    s.seeds.clear();
    for (auto v : int_list_of(shared, "seeds", {})) {
      if (v < 0) throw ConfigError("seeds must be >= 0");
      s.seeds.push_back(static_cast<std::uint64_t>(v));
    }
  }
  s.total_steps = shared.get_int("total_steps", s.total_steps);
  s.log_interval = shared.get_int("log_interval", s.log_interval);
  s.nuisance_levels = int_list_of(shared, "nuisance_levels", s.nuisance_levels);
  s.patch_counts = int_list_of(shared, "patch_counts", s.patch_counts);
  s.n_dir = static_cast<int>(shared.get_int("n_dir", s.n_dir));
  s.n_dist = static_cast<int>(shared.get_int("n_dist", s.n_dist));
  s.token_length = static_cast<int>(shared.get_int("token_length", s.token_length));
  s.expert_fraction = shared.get_double("expert_fraction", s.expert_fraction);
  s.workers = static_cast<int>(shared.get_int("workers", s.workers));
  s.output_dir = shared.get_string("output_dir", s.output_dir.string());
  s.dqn = agents::DqnConfig::from_kv(shared);
  s.ppo = agents::PpoConfig::from_kv(shared);

  auto& e = s.encoder;
  if (shared.has("encoder.hidden")) e.hidden = int_list_of(shared, "encoder.hidden", {});
  e.image.filters1 = static_cast<int>(shared.get_int("image.filters1", e.image.filters1));
  e.image.filters2 = static_cast<int>(shared.get_int("image.filters2", e.image.filters2));
  e.image.hidden = static_cast<int>(shared.get_int("image.hidden", e.image.hidden));
  if (shared.has("text.widths")) e.text.widths = int_list_of(shared, "text.widths", {});
  e.text.filters = static_cast<int>(shared.get_int("text.filters", e.text.filters));
  e.embedding = embed::parse_mode(shared.get_string("text.embedding", std::string(embed::to_string(e.embedding))));
  e.embedding_dim = static_cast<int>(shared.get_int("text.embedding_dim", e.embedding_dim));

  // Anything left over is a typo.
  const auto known = s.to_kv();
  for (const auto& [k, v] : shared.values()) {
    if (!known.has(k)) throw ConfigError("unknown experiment key '" + k + "'");
  }
  KvConfig arena_known;
  world::ArenaConfig{}.to_kv(arena_known);
  for (const auto& [k, v] : s.arena.values()) {
    if (!arena_known.has(k)) throw ConfigError("unknown arena key 'arena." + k + "'");
  }
  s.validate();
  return s;
}

ExperimentSpec ExperimentSpec::load(const std::filesystem::path& path) { return from_kv(KvConfig::load(path)); }

KvConfig ExperimentSpec::to_kv() const {
  KvConfig kv;
  kv.set("name", name);
  kv.set("scenarios", join_list(scenarios, [](const std::string& x) { return x; }));
  kv.set("algorithms", join_list(algorithms, [](Algorithm a) { return std::string(to_string(a)); }));
  kv.set("representations",
         join_list(representations, [](Representation r) { return std::string(agents::to_string(r)); }));
  kv.set("seeds", join_list(seeds, [](std::uint64_t v) { return std::to_string(v); }));
  kv.set("total_steps", std::to_string(total_steps));
  kv.set("log_interval", std::to_string(log_interval));
  kv.set("nuisance_levels", join_list(nuisance_levels, [](int v) { return std::to_string(v); }));
  kv.set("patch_counts", join_list(patch_counts, [](int v) { return std::to_string(v); }));
  kv.set("n_dir", std::to_string(n_dir));
  kv.set("n_dist", std::to_string(n_dist));
  kv.set("expert_fraction", format_number(expert_fraction));
  kv.set("workers", std::to_string(workers));
  kv.set("output_dir", output_dir.string());
  kv.set("token_length", std::to_string(token_length));
  for (const auto& [k, v] : arena.values()) kv.set("arena." + k, v);
  dqn.to_kv(kv);
  ppo.to_kv(kv);
  kv.set("encoder.hidden", join_list(encoder.hidden, [](int v) { return std::to_string(v); }));
  kv.set("image.filters1", std::to_string(encoder.image.filters1));
  kv.set("image.filters2", std::to_string(encoder.image.filters2));
  kv.set("image.hidden", std::to_string(encoder.image.hidden));
  kv.set("text.widths", join_list(encoder.text.widths, [](int v) { return std::to_string(v); }));
  kv.set("text.filters", std::to_string(encoder.text.filters));
  kv.set("text.embedding", std::string(embed::to_string(encoder.embedding)));
  kv.set("text.embedding_dim", std::to_string(encoder.embedding_dim));
  for (const auto& [rep, o] : overrides) {
    for (const auto& [k, v] : o.values()) kv.set(rep_prefix(rep) + k, v);
  }
  return kv;
}

KvConfig ExperimentSpec::effective(Representation rep) const {
  KvConfig out;
  const KvConfig all = to_kv();
  for (const auto& [k, v] : all.values()) {
    bool scoped = false;
    for (auto r : kAllReps) scoped = scoped || k.rfind(rep_prefix(r), 0) == 0;
    if (!scoped) out.set(k, v);
  }
  if (auto it = overrides.find(rep); it != overrides.end()) {
    for (const auto& [k, v] : it->second.values()) out.set(k, v);
  }
  return out;
}

void ExperimentSpec::validate() const {
  if (scenarios.empty() || algorithms.empty() || representations.empty() || seeds.empty()) {
    throw UsageError("experiment needs at least one scenario, algorithm, representation and seed");
  }
  for (const auto& sc : scenarios) world::preset(sc);
  if (total_steps < 0) throw ConfigError("total_steps must be >= 0");
  if (log_interval < 0) throw ConfigError("log_interval must be >= 0");
  if (token_length < 0) throw ConfigError("token_length must be >= 0");
  if (workers < 1) throw ConfigError("workers must be >= 1");
  if (expert_fraction < 0.0) throw ConfigError("expert_fraction must be >= 0");
  for (int n : nuisance_levels) {
    if (n < 0) throw ConfigError("nuisance levels must be >= 0");
  }
  for (int n : patch_counts) langgen::PatchGrid{n, n_dist}.validate();
  langgen::PatchGrid{n_dir, n_dist}.validate();
  dqn.validate();
  ppo.validate();
}

std::int64_t ExperimentSpec::interval() const {
  if (log_interval > 0) return log_interval;
  return std::max<std::int64_t>(1, total_steps / 100);
}

std::uint64_t spec_hash(const ExperimentSpec& spec, const langgen::TemplateBank& bank) {
  Fnv1a h;
  const KvConfig kv = spec.to_kv();
  for (const auto& [k, v] : kv.values()) {
    if (bookkeeping(k)) continue;
    h.update(k).update("=").update(v).update("\n");
  }
  h.update("\x1e").update(bank.source_text()).update("\x1e").update(code_version());
  return h.digest();
}

std::string hex(std::uint64_t v) {
  std::ostringstream o;
  o << std::hex;
  o.width(16);
  o.fill('0');
  o << v;
  return o.str();
}

bool representation_specific(const std::string& key) {
  return key.rfind("image.", 0) == 0 || key.rfind("text.", 0) == 0 || key == "token_length";
}

void check_fairness(const ExperimentSpec& spec) {
  if (spec.representations.size() < 2) return;
  const auto ref_rep = spec.representations.front();
  const auto ref = spec.effective(ref_rep);
  std::string problems;
  for (std::size_t i = 1; i < spec.representations.size(); ++i) {
    const auto rep = spec.representations[i];
    const auto other = spec.effective(rep);
    std::set<std::string> keys;
    for (const auto& [k, v] : ref.values()) keys.insert(k);
    for (const auto& [k, v] : other.values()) keys.insert(k);
    for (const auto& k : keys) {
      if (representation_specific(k)) continue;
      const auto a = ref.get(k), b = other.get(k);
      if (a != b) {
        problems += "\n  " + k + ": " + std::string(agents::to_string(ref_rep)) + "=" + a.value_or("<unset>") + ", " +
                    std::string(agents::to_string(rep)) + "=" + b.value_or("<unset>");
      }
    }
  }
  if (!problems.empty()) {
    throw ConfigError("refusing an unfair comparison; shared hyperparameters differ across representations:" +
                      problems);
  }
}

RunSettings resolve_run(const ExperimentSpec& spec, const std::string& scenario, Algorithm alg, Representation rep,
                        std::uint64_t seed) {
  const auto s = ExperimentSpec::from_kv(spec.effective(rep));
  RunSettings r;
  r.scenario = scenario;
  r.token_length = s.token_length;
  r.arena = world::ArenaConfig::from_kv(s.arena, world::preset(scenario));
  r.arena.validate();
  r.algorithm = alg;
  r.representation = rep;
  r.seed = seed;
  r.total_steps = s.total_steps;
  r.grid = {s.n_dir, s.n_dist};
  r.dqn = s.dqn;
  r.ppo = s.ppo;
  r.encoder = s.encoder;
  r.expert_fraction = s.expert_fraction;
  return r;
}

std::filesystem::path resolve_output(const std::filesystem::path& dir) {
  if (dir.is_absolute()) return dir;
  if (const char* root = std::getenv("SEMRL_OUTPUT_ROOT"); root != nullptr && *root != '\0') {
    return std::filesystem::path(root) / dir;
  }
  return dir;
}

}  // namespace semrl::harness
