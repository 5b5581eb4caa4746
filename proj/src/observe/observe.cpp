#include "semrl/observe/observe.hpp"

#include <algorithm>
#include <ostream>
#include <tuple>

#include "semrl/core/rng.hpp"

namespace semrl::observe {

using world::EntityClass;

Rgb class_color(EntityClass cls) {
  switch (cls) {
    case EntityClass::kEnemy: return {255, 0, 0};
    case EntityClass::kFireball: return {255, 160, 0};
    case EntityClass::kMedipack: return {0, 255, 0};
    case EntityClass::kAmmo: return {0, 0, 255};
    case EntityClass::kNuisance: return {255, 0, 255};
  }
  return {};
}

Rgb RawFrame::at(int row, int col) const {
  const auto i = static_cast<std::size_t>((row * width + col) * 3);
  return {pixels[i], pixels[i + 1], pixels[i + 2]};
}

int SegMap::channel_sum(int channel) const {
  const auto plane = static_cast<std::size_t>(height * width);
  const auto begin = data.begin() + static_cast<std::ptrdiff_t>(plane * static_cast<std::size_t>(channel));
  int sum = 0;
  for (auto it = begin; it != begin + static_cast<std::ptrdiff_t>(plane); ++it) sum += *it;
  return sum;
}

namespace {

// Lower value paints over higher when several occupants share a cell.
int paint_priority(EntityClass cls) { return static_cast<int>(cls); }

}  // namespace

RawFrame render_raw(const world::WorldState& state, std::uint64_t texture_seed) {
  RawFrame f;
  f.height = state.height;
  f.width = state.width;
  f.pixels.resize(static_cast<std::size_t>(f.height * f.width * 3));

  auto tex = rng::make_engine(texture_seed, rng::Stream::kTexture);
  for (int i = 0; i < f.height * f.width; ++i) {
    const int shade = kBackgroundGray - kBackgroundJitter + rng::below(tex, 2 * kBackgroundJitter + 1);
    const auto v = static_cast<std::uint8_t>(shade);
    f.pixels[static_cast<std::size_t>(3 * i)] = v;
    f.pixels[static_cast<std::size_t>(3 * i + 1)] = v;
    f.pixels[static_cast<std::size_t>(3 * i + 2)] = v;
  }

  std::vector<int> best(static_cast<std::size_t>(f.height * f.width), world::kNumEntityClasses);
  for (const auto& e : state.entities) {
    if (!e.alive) continue;
    auto& slot = best[static_cast<std::size_t>(e.row * f.width + e.col)];
    slot = std::min(slot, paint_priority(e.cls));
  }
  auto paint = [&](int cell, Rgb c) {
    f.pixels[static_cast<std::size_t>(3 * cell)] = c.r;
    f.pixels[static_cast<std::size_t>(3 * cell + 1)] = c.g;
    f.pixels[static_cast<std::size_t>(3 * cell + 2)] = c.b;
  };
  for (int cell = 0; cell < f.height * f.width; ++cell) {
    const int p = best[static_cast<std::size_t>(cell)];
    if (p < world::kNumEntityClasses) paint(cell, class_color(static_cast<EntityClass>(p)));
  }
  paint(state.agent_row * f.width + state.agent_col, kAgentColor);
  return f;
}

SegMap render_seg(const world::WorldState& state) {
  SegMap m;
  m.height = state.height;
  m.width = state.width;
  m.data.assign(static_cast<std::size_t>(kSegChannels * m.height * m.width), 0);
  auto set = [&](int ch, int row, int col) {
    m.data[static_cast<std::size_t>((ch * m.height + row) * m.width + col)] = 1;
  };
  for (const auto& e : state.entities) {
    if (e.alive) set(static_cast<int>(e.cls), e.row, e.col);
  }
  set(kAgentChannel, state.agent_row, state.agent_col);
  return m;
}

ObjectList extract_objects(const world::WorldState& state) {
  ObjectList list;
  list.width = state.width;
  list.height = state.height;
  list.agent_col = state.agent_col;
  list.agent_row = state.agent_row;
  for (const auto& e : state.entities) {
    if (e.alive) list.records.push_back({e.cls, e.col, e.row, e.id});
  }
  std::sort(list.records.begin(), list.records.end(), [](const ObjectRecord& a, const ObjectRecord& b) {
    return std::tuple(a.cls, a.row, a.col, a.id) < std::tuple(b.cls, b.row, b.col, b.id);
  });
  return list;
}

SegMap seg_from_objects(const ObjectList& objects) {
  SegMap m;
  m.height = objects.height;
  m.width = objects.width;
  m.data.assign(static_cast<std::size_t>(kSegChannels * m.height * m.width), 0);
  for (const auto& r : objects.records) {
    m.data[static_cast<std::size_t>((static_cast<int>(r.cls) * m.height + r.row) * m.width + r.col)] = 1;
  }
  m.data[static_cast<std::size_t>((kAgentChannel * m.height + objects.agent_row) * m.width +
                                  objects.agent_col)] = 1;
  return m;
}

void write_ppm(std::ostream& out, const RawFrame& frame) {
  out << "P3\n" << frame.width << ' ' << frame.height << "\n255\n";
  for (int r = 0; r < frame.height; ++r) {
    for (int c = 0; c < frame.width; ++c) {
      const Rgb px = frame.at(r, c);
      out << int(px.r) << ' ' << int(px.g) << ' ' << int(px.b) << (c + 1 < frame.width ? "  " : "\n");
    }
  }
}

void write_seg_text(std::ostream& out, const SegMap& seg) {
  for (int ch = 0; ch < seg.channels; ++ch) {
    out << (ch == kAgentChannel ? std::string_view("Agent") : world::to_string(static_cast<EntityClass>(ch)))
        << ':';
    for (int r = 0; r < seg.height; ++r) {
      out << ' ';
      for (int c = 0; c < seg.width; ++c) out << int(seg.at(ch, r, c));
    }
    out << '\n';
  }
}

}  // namespace semrl::observe
