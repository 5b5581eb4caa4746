#include <algorithm>
#include <numeric>
#include <set>

#include "doctest.h"
#include "semrl/core/error.hpp"
#include "semrl/core/kv_config.hpp"
#include "semrl/langgen/generator.hpp"
#include "semrl/langgen/measure.hpp"

using namespace semrl;
using namespace semrl::world;
using namespace semrl::langgen;

namespace {

const TemplateBank& bank() {
  static const TemplateBank b = TemplateBank::load_default();
  return b;
}

SceneSummary empty_scene(const PatchGrid& grid, int agent_col) {
  observe::ObjectList objs;
  objs.width = 21;
  objs.height = 15;
  objs.agent_col = agent_col;
  objs.agent_row = 14;
  return summarize(objs, grid);
}

// Sparse random summary: most patches empty, counts spread over 1..99.
SceneSummary random_scene(const PatchGrid& grid, rng::Engine& eng) {
  auto s = empty_scene(grid, rng::below(eng, 99));
  for (auto& p : s.patches) {
    for (auto& c : p.counts) {
      const int r = rng::below(eng, 10);
      c = r < 7 ? 0 : (r < 9 ? 1 + rng::below(eng, 5) : 1 + rng::below(eng, 99));
    }
  }
  return s;
}

std::vector<WorldState> rollout_states(const ArenaConfig& cfg, std::uint64_t seed, int steps) {
  Arena arena(cfg);
  auto eng = rng::make_engine(seed, rng::Stream::kExploration);
  std::vector<WorldState> out;
  auto s = arena.reset(seed);
  for (int i = 0; i < steps; ++i) {
    out.push_back(s);
    s = s.terminal ? arena.reset(seed + static_cast<std::uint64_t>(i) + 1)
                   : arena.step(s, static_cast<Action>(rng::below(eng, kNumActions))).state;
  }
  return out;
}

}  // namespace

TEST_CASE("patch grid partitions columns around the line of fire") {
  PatchGrid g{5, 3};
  const int width = 21, agent = 4;
  std::vector<int> idx;
  for (int c = 0; c < width; ++c) idx.push_back(g.dir_index(width, agent, c));
  CHECK(idx[agent] == 2);
  for (int c = 0; c < width; ++c) {
    if (c != agent) CHECK(idx[static_cast<std::size_t>(c)] != 2);
    CHECK(idx[static_cast<std::size_t>(c)] >= 0);
    CHECK(idx[static_cast<std::size_t>(c)] < 5);
    if (c > 0) CHECK(idx[static_cast<std::size_t>(c)] >= idx[static_cast<std::size_t>(c - 1)]);
  }
  CHECK(g.dist_index(15, 14, 14) == 2);
  CHECK(g.dist_index(15, 14, 0) == 0);
  CHECK_THROWS_AS(PatchGrid({4, 3}).validate(), ConfigError);
}

TEST_CASE("summarize") {
  PatchGrid g{3, 3};
  SUBCASE("empty arena gives nine zero patches") {
    Arena arena(ArenaConfig{});
    const auto s = summarize(observe::extract_objects(arena.reset(1)), g);
    REQUIRE(s.patches.size() == 9);
    for (const auto& p : s.patches) CHECK(p.empty());
    CHECK(s.agent_col == 10);
  }
  SUBCASE("top-left enemy lands in the leftmost far patch") {
    Arena arena(ArenaConfig{});
    auto st = arena.reset(1);
    st.entities.push_back(Entity{st.next_id++, EntityClass::kEnemy, 0, 0, true});
    const auto s = summarize(observe::extract_objects(st), g);
    for (const auto& p : s.patches) {
      const int n = p.counts[static_cast<std::size_t>(EntityClass::kEnemy)];
      CHECK(n == (p.dir == 0 && p.dist == 0 ? 1 : 0));
    }
  }
  SUBCASE("class totals are conserved") {
    ArenaConfig cfg = preset("Super");
    for (const auto& st : rollout_states(cfg, 7, 300)) {
      const auto s = summarize(observe::extract_objects(st), g);
      for (int c = 0; c < kNumEntityClasses; ++c) {
        int total = 0;
        for (const auto& p : s.patches) total += p.counts[static_cast<std::size_t>(c)];
        CHECK(total == st.count(static_cast<EntityClass>(c)));
      }
    }
  }
}

TEST_CASE("template bank") {
  const auto& b = bank();
  CHECK(b.variants().size() == 10);
  CHECK(b.max_dir_offset() == 15);
  CHECK(b.dist_levels() == 3);
  CHECK_NOTHROW(b.check_supports({31, 3}));
  CHECK_THROWS_AS(b.check_supports({33, 3}), ConfigError);
  CHECK_THROWS_AS(b.check_supports({3, 4}), ConfigError);

  const std::string head = "CLASS Enemy: a | as\nCLASS Fireball: b | bs\nCLASS Medipack: c | cs\n"
                           "CLASS Ammo: d | ds\nCLASS Nuisance: e | es\nDIR 0: here\nDIST 0: far\n";
  auto variants = [](int n, const std::string& extra) {
    std::string s;
    for (int i = 0; i < n; ++i) s += "VARIANT " + std::to_string(i) + "\nat {col}\n{count} {class} {dir} {dist}\n" + extra;
    return s;
  };
  CHECK_NOTHROW(TemplateBank::parse(head + variants(10, "")));
  CHECK_THROWS_AS(TemplateBank::parse(head + variants(9, "")), ConfigError);
  CHECK_THROWS_AS(TemplateBank::parse(head + variants(10, "{count} {oops}\n")), ConfigError);
  CHECK_THROWS_AS(TemplateBank::parse(head + variants(10, "{count} {class}\n")), ConfigError);
  CHECK_THROWS_AS(TemplateBank::parse(head + variants(10, "again {col}\n")), ConfigError);
  CHECK_THROWS_AS(TemplateBank::parse("at {col}\n" + head + variants(10, "")), ConfigError);
  CHECK_THROWS_AS(TemplateBank::parse("CLASS Goblin: g | gs\n" + head + variants(10, "")), ConfigError);
}

TEST_CASE("describe with a pinned variant") {
  PatchGrid g{3, 3};
  auto s = empty_scene(g, 10);
  rng::Engine eng(1);
  SUBCASE("empty scene is the status clause only") {
    for (int v = 0; v < 10; ++v) {
      const auto d = describe(s, g, bank(), eng, v);
      std::vector<std::string> status;
      for (const auto& item : bank().variant(v).status) status.push_back(item.slot ? "10" : item.word);
      CHECK(d.words == status);
    }
  }
  SUBCASE("golden sentence for variant 0") {
    s.patches[static_cast<std::size_t>(g.patch_index(0, 0))].counts[0] = 1;
    auto& near = s.patches[static_cast<std::size_t>(g.patch_index(1, 2))].counts;
    near[1] = 2;
    near[2] = 1;
    const auto d = describe(s, g, bank(), eng, 0);
    CHECK(join(d.words) ==
          "you are standing in column 10 i can see 1 demon to the left far away from here i can see 2 "
          "fireballs straight ahead close by from here i can see 1 medkit straight ahead close by from here");
    CHECK(d.variants == std::vector<int>(10, 0));
  }
  CHECK_THROWS_AS(describe(s, g, bank(), eng, 10), UsageError);
  s.patches[0].counts[0] = 100;
  CHECK_THROWS_AS(describe(s, g, bank(), eng, 0), UsageError);
}

TEST_CASE("ambiguity changes wording but not content") {
  PatchGrid g{3, 3};
  rng::Engine scenes(3);
  int differing = 0;
  for (int i = 0; i < 50; ++i) {
    const auto s = random_scene(g, scenes);
    auto a = rng::make_engine(100 + i, rng::Stream::kAmbiguity);
    auto b = rng::make_engine(200 + i, rng::Stream::kAmbiguity);
    const auto da = describe(s, g, bank(), a), db = describe(s, g, bank(), b);
    differing += da.words != db.words;
    CHECK(parse_description(da.words, g, bank()) == s);
    CHECK(parse_description(db.words, g, bank()) == s);
  }
  CHECK(differing >= 45);
}

TEST_CASE("information equivalence over random summaries") {
  for (PatchGrid g : {PatchGrid{3, 3}, PatchGrid{7, 3}, PatchGrid{31, 3}}) {
    rng::Engine scenes(11);
    auto amb = rng::make_engine(12, rng::Stream::kAmbiguity);
    const int n = g.n_dir == 3 ? 10000 : 500;
    int failures = 0;
    for (int i = 0; i < n; ++i) {
      const auto s = random_scene(g, scenes);
      std::optional<int> forced;
      if (i % 2 == 0) forced = (i / 2) % 10;
      const auto d = describe(s, g, bank(), amb, forced);
      failures += parse_description(d.words, g, bank()) != s;
    }
    CHECK(failures == 0);
  }
}

TEST_CASE("parser rejects malformed sentences") {
  PatchGrid g{3, 3};
  CHECK_FALSE(parse_description({}, g, bank()));
  CHECK_FALSE(parse_description({"you", "are", "standing"}, g, bank()));
  // Number agreement and duplicated (patch, class) clauses.
  CHECK_FALSE(parse_description(split("you are standing in column 3 i can see 2 demon to the left far away from here", ' '),
                                g, bank()));
  CHECK_FALSE(parse_description(split("you are standing in column 3 i can see 1 demon to the left far away from here "
                                      "i can see 2 demons to the left far away from here",
                                      ' '),
                                g, bank()));
  CHECK(parse_description(split("you are standing in column 3 i can see 1 demon to the left far away from here", ' '), g,
                          bank()));
}

TEST_CASE("vocabulary closure and tokenization") {
  const auto vocab = Vocabulary::from_bank(bank());
  CHECK(vocab.word(kPadId) == "<pad>");
  CHECK(vocab.word(kOovId) == "<oov>");
  CHECK(vocab.index("0") == 2);
  CHECK(vocab.index("99") == 101);
  CHECK(vocab.index("DEMON") == vocab.index("demon"));
  CHECK(vocab.index("zebra") == kOovId);

  PatchGrid g{3, 3};
  const int lmax = max_sentence_length(bank(), g);
  rng::Engine scenes(5);
  auto amb = rng::make_engine(6, rng::Stream::kAmbiguity);
  long oov = 0;
  int truncated = 0, roundtrip_fail = 0;
  for (int i = 0; i < 10000; ++i) {
    const auto d = describe(random_scene(g, scenes), g, bank(), amb);
    for (const auto& w : d.words) oov += !vocab.contains(w);
    const auto t = tokenize(d.words, vocab, lmax);
    truncated += t.truncated;
    roundtrip_fail += detokenize(t, vocab) != d.words;
  }
  CHECK(oov == 0);
  CHECK(truncated == 0);
  CHECK(roundtrip_fail == 0);

  SUBCASE("padding and truncation") {
    const auto empty = tokenize({}, vocab, 8);
    CHECK(empty.ids == std::vector<std::uint16_t>(8, kPadId));
    CHECK(empty.true_length == 0);
    const std::vector<std::string> five{"i", "can", "see", "1", "demon"};
    const auto t = tokenize(five, vocab, 8);
    CHECK(t.true_length == 5);
    CHECK_FALSE(t.truncated);
    for (int i = 5; i < 8; ++i) CHECK(t.ids[static_cast<std::size_t>(i)] == kPadId);
    const auto cut = tokenize(five, vocab, 3);
    CHECK(cut.truncated);
    CHECK(cut.true_length == 3);
    CHECK_THROWS_AS(tokenize(five, vocab, 0), UsageError);
  }
}

TEST_CASE("max sentence length is an upper bound") {
  for (PatchGrid g : {PatchGrid{3, 3}, PatchGrid{31, 3}}) {
    auto s = empty_scene(g, 98);
    for (auto& p : s.patches) p.counts.fill(99);
    rng::Engine amb(1);
    int longest = 0;
    for (int v = 0; v < 10; ++v) longest = std::max(longest, static_cast<int>(describe(s, g, bank(), amb, v).words.size()));
    CHECK(longest <= max_sentence_length(bank(), g));
    for (int i = 0; i < 200; ++i) CHECK(describe(s, g, bank(), amb).words.size() <= static_cast<std::size_t>(max_sentence_length(bank(), g)));
  }
}

TEST_CASE("adding an entity never shortens the sentence") {
  PatchGrid g{3, 3};
  rng::Engine scenes(9);
  int violations = 0;
  for (int i = 0; i < 2000; ++i) {
    auto s = random_scene(g, scenes);
    auto bigger = s;
    auto& p = bigger.patches[static_cast<std::size_t>(rng::below(scenes, 9))];
    auto& c = p.counts[static_cast<std::size_t>(rng::below(scenes, kNumEntityClasses))];
    if (c == 99) continue;
    ++c;
    auto a = rng::make_engine(i, rng::Stream::kAmbiguity), b = a;
    violations += describe(bigger, g, bank(), a).words.size() < describe(s, g, bank(), b).words.size();
  }
  CHECK(violations == 0);
}

TEST_CASE("finer grids give longer sentences on the same states") {
  const auto cfg = preset("Super");
  double coarse = 0, fine = 0;
  PatchGrid g3{3, 3}, g31{31, 3};
  auto a = rng::make_engine(1, rng::Stream::kAmbiguity), b = a;
  for (const auto& st : rollout_states(cfg, 21, 200)) {
    const auto objs = observe::extract_objects(st);
    coarse += static_cast<double>(describe(summarize(objs, g3), g3, bank(), a).words.size());
    fine += static_cast<double>(describe(summarize(objs, g31), g31, bank(), b).words.size());
  }
  CHECK(fine > coarse);
}

TEST_CASE("measure_length") {
  PatchGrid g{3, 3};
  SUBCASE("an arena with nothing in it is the status clause only") {
    ArenaConfig cfg = preset("DefendLine-mini");
    cfg.max_enemies = 0;
    const auto stats = measure_length(cfg, g, bank(), 2, 1, RolloutPolicy::kRandom);
    int shortest = 1000, longest = 0;
    for (const auto& v : bank().variants()) {
      shortest = std::min(shortest, static_cast<int>(v.status.size()));
      longest = std::max(longest, static_cast<int>(v.status.size()));
    }
    CHECK(stats.mean_words >= shortest);
    CHECK(stats.max_words <= longest);
  }
  SUBCASE("crowded super scenario") {
    const auto stats = measure_length(preset("Super-crowded"), g, bank(), 3, 1, RolloutPolicy::kRandom);
    MESSAGE("mean words per state: " << stats.mean_words);
    CHECK(stats.mean_words > 250.0);
  }
}
