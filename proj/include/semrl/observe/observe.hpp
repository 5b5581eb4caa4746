#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <vector>

#include "semrl/world/arena.hpp"

namespace semrl::observe {

struct Rgb {
  std::uint8_t r = 0, g = 0, b = 0;
  bool operator==(const Rgb&) const = default;
};

// Fixed palette: one saturated color per class plus the agent.
inline constexpr Rgb kAgentColor{255, 255, 255};
Rgb class_color(world::EntityClass cls);

inline constexpr int kBackgroundGray = 128;
// +-15 levels around 128 is a brightness band of +-11.7%.
inline constexpr int kBackgroundJitter = 15;

struct RawFrame {
  int height = 0;
  int width = 0;
  std::vector<std::uint8_t> pixels;  // height x width x 3, row-major

  Rgb at(int row, int col) const;
  bool operator==(const RawFrame&) const = default;
};

// Channels 0..4 follow world::EntityClass; channel 5 is the agent.
inline constexpr int kSegChannels = world::kNumEntityClasses + 1;
inline constexpr int kAgentChannel = world::kNumEntityClasses;

struct SegMap {
  int channels = kSegChannels;
  int height = 0;
  int width = 0;
  std::vector<std::uint8_t> data;  // channels x height x width

  std::uint8_t at(int channel, int row, int col) const {
    return data[static_cast<std::size_t>((channel * height + row) * width + col)];
  }
  int channel_sum(int channel) const;
  bool operator==(const SegMap&) const = default;
};

struct ObjectRecord {
  world::EntityClass cls = world::EntityClass::kEnemy;
  int col = 0;
  int row = 0;
  std::uint32_t id = 0;
  bool operator==(const ObjectRecord&) const = default;
};

struct ObjectList {
  int width = 0;
  int height = 0;
  int agent_col = 0;
  int agent_row = 0;
  // Sorted by (class, row, col, id).
  std::vector<ObjectRecord> records;
  bool operator==(const ObjectList&) const = default;
};

RawFrame render_raw(const world::WorldState& state, std::uint64_t texture_seed);
SegMap render_seg(const world::WorldState& state);
ObjectList extract_objects(const world::WorldState& state);

// Lossless at cell resolution: the segmentation map rebuilt from an object list.
SegMap seg_from_objects(const ObjectList& objects);

// Debug dumps.
void write_ppm(std::ostream& out, const RawFrame& frame);
void write_seg_text(std::ostream& out, const SegMap& seg);

}  // namespace semrl::observe
