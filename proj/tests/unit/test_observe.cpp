#include <algorithm>
#include <array>
#include <set>
#include <sstream>

#include "doctest.h"
#include "semrl/observe/observe.hpp"

using namespace semrl;
using namespace semrl::world;
using namespace semrl::observe;

namespace {

bool is_background(Rgb px) {
  return px.r == px.g && px.g == px.b && px.r >= kBackgroundGray - kBackgroundJitter &&
         px.r <= kBackgroundGray + kBackgroundJitter;
}

bool is_class_color(Rgb px) {
  for (int c = 0; c < kNumEntityClasses; ++c) {
    if (px == class_color(static_cast<EntityClass>(c))) return true;
  }
  return false;
}

// Every state of a long random-policy run of the scenario.
std::vector<WorldState> random_states(const ArenaConfig& cfg, std::uint64_t seed, int steps) {
  Arena arena(cfg);
  auto eng = rng::make_engine(seed, rng::Stream::kExploration);
  std::vector<WorldState> out;
  auto s = arena.reset(seed);
  for (int i = 0; i < steps; ++i) {
    out.push_back(s);
    if (s.terminal) s = arena.reset(seed + static_cast<std::uint64_t>(i) + 1);
    else s = arena.step(s, static_cast<Action>(rng::below(eng, kNumActions))).state;
  }
  return out;
}

ArenaConfig busy_super() {
  auto cfg = preset("Super");
  cfg.nuisance_count = 40;
  return cfg;
}

}  // namespace

TEST_CASE("empty arena renders background only") {
  Arena arena(preset("DefendLine"));
  auto s = arena.reset(1);
  auto f = render_raw(s, 99);
  CHECK(f.height == 15);
  CHECK(f.width == 21);
  CHECK(f.pixels.size() == 15u * 21u * 3u);
  for (int r = 0; r < f.height; ++r) {
    for (int c = 0; c < f.width; ++c) {
      if (r == s.agent_row && c == s.agent_col) {
        CHECK(f.at(r, c) == kAgentColor);
      } else {
        CHECK(is_background(f.at(r, c)));
        CHECK_FALSE(is_class_color(f.at(r, c)));
      }
    }
  }
}

TEST_CASE("a single enemy paints exactly one cell") {
  Arena arena(preset("DefendLine"));
  auto s = arena.reset(1);
  s.entities.push_back(Entity{1, EntityClass::kEnemy, 5, 2, true});
  auto f = render_raw(s, 3);
  int red = 0;
  for (int r = 0; r < f.height; ++r) {
    for (int c = 0; c < f.width; ++c) red += f.at(r, c) == class_color(EntityClass::kEnemy);
  }
  CHECK(red == 1);
  CHECK(f.at(2, 5) == class_color(EntityClass::kEnemy));
}

TEST_CASE("texture seeds only change unoccupied cells") {
  for (const auto& s : random_states(busy_super(), 5, 300)) {
    auto a = render_raw(s, 1), b = render_raw(s, 2);
    std::set<std::pair<int, int>> occupied{{s.agent_row, s.agent_col}};
    for (const auto& e : s.entities) occupied.insert({e.row, e.col});
    int differing = 0;
    for (int r = 0; r < s.height; ++r) {
      for (int c = 0; c < s.width; ++c) {
        if (occupied.count({r, c}) != 0) {
          CHECK(a.at(r, c) == b.at(r, c));
        } else {
          CHECK(is_background(a.at(r, c)));
          differing += !(a.at(r, c) == b.at(r, c));
        }
      }
    }
    CHECK(differing > 0);
    CHECK(render_raw(s, 1) == a);
  }
}

TEST_CASE("segmentation of an empty arena holds only the agent") {
  Arena arena(preset("DefendCenter"));
  auto s = arena.reset(4);
  auto m = render_seg(s);
  CHECK(m.channels == kSegChannels);
  for (int ch = 0; ch < kNumEntityClasses; ++ch) CHECK(m.channel_sum(ch) == 0);
  CHECK(m.channel_sum(kAgentChannel) == 1);
  CHECK(m.at(kAgentChannel, s.agent_row, s.agent_col) == 1);
}

TEST_CASE("segmentation counts enemies") {
  Arena arena(preset("DefendLine"));
  auto s = arena.reset(4);
  s.entities = {Entity{1, EntityClass::kEnemy, 1, 1, true}, Entity{2, EntityClass::kEnemy, 3, 4, true},
                Entity{3, EntityClass::kEnemy, 7, 1, true}};
  CHECK(render_seg(s).channel_sum(static_cast<int>(EntityClass::kEnemy)) == 3);
}

TEST_CASE("segmentation channel sums match entity counts along an episode") {
  for (const auto& s : random_states(busy_super(), 8, 1000)) {
    auto m = render_seg(s);
    for (int c = 0; c < kNumEntityClasses; ++c) {
      // Oracle: distinct cells per class straight from the entity list.
      std::set<std::pair<int, int>> cells;
      int alive = 0;
      for (const auto& e : s.entities) {
        if (e.alive && static_cast<int>(e.cls) == c) {
          cells.insert({e.row, e.col});
          ++alive;
        }
      }
      CHECK(m.channel_sum(c) == static_cast<int>(cells.size()));
      CHECK(m.channel_sum(c) == alive);
    }
    for (auto v : m.data) CHECK(v <= 1);
  }
}

TEST_CASE("object list ordering") {
  Arena arena(preset("Super"));
  auto s = arena.reset(4);
  s.entities.clear();
  auto empty = extract_objects(s);
  CHECK(empty.records.empty());
  CHECK(empty.agent_col == 10);

  s.entities = {Entity{7, EntityClass::kMedipack, 2, 14, true}, Entity{8, EntityClass::kEnemy, 9, 5, true},
                Entity{9, EntityClass::kEnemy, 3, 1, true}};
  auto list = extract_objects(s);
  REQUIRE(list.records.size() == 3);
  CHECK(list.records[0] == ObjectRecord{EntityClass::kEnemy, 3, 1, 9});
  CHECK(list.records[1] == ObjectRecord{EntityClass::kEnemy, 9, 5, 8});
  CHECK(list.records[2] == ObjectRecord{EntityClass::kMedipack, 2, 14, 7});
}

TEST_CASE("object list is a bijection with alive entities and rebuilds the seg map") {
  for (const auto& s : random_states(busy_super(), 21, 600)) {
    auto list = extract_objects(s);
    std::multiset<std::tuple<int, int, int, std::uint32_t>> a, b;
    for (const auto& e : s.entities) {
      if (e.alive) a.insert({static_cast<int>(e.cls), e.col, e.row, e.id});
    }
    for (const auto& r : list.records) b.insert({static_cast<int>(r.cls), r.col, r.row, r.id});
    CHECK(a == b);
    CHECK(seg_from_objects(list) == render_seg(s));

    // Raw frame = seg content painted over a texture.
    auto f = render_raw(s, 77);
    auto m = render_seg(s);
    for (int r = 0; r < s.height; ++r) {
      for (int c = 0; c < s.width; ++c) {
        Rgb expect{};
        bool painted = false;
        if (m.at(kAgentChannel, r, c)) {
          expect = kAgentColor;
          painted = true;
        } else {
          for (int ch = 0; ch < kNumEntityClasses && !painted; ++ch) {
            if (m.at(ch, r, c)) {
              expect = class_color(static_cast<EntityClass>(ch));
              painted = true;
            }
          }
        }
        if (painted) CHECK(f.at(r, c) == expect);
        else CHECK(is_background(f.at(r, c)));
      }
    }
  }
}

TEST_CASE("debug dumps") {
  Arena arena(preset("DefendLine-mini"));
  auto s = arena.reset(0);
  std::ostringstream ppm, seg;
  write_ppm(ppm, render_raw(s, 0));
  write_seg_text(seg, render_seg(s));
  CHECK(ppm.str().rfind("P3\n9 7\n255\n", 0) == 0);
  const std::string text = seg.str();
  CHECK(text.find("Agent:") != std::string::npos);
  CHECK(std::count(text.begin(), text.end(), '\n') == kSegChannels);
}
