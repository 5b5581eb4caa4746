#pragma once

#include <array>
#include <vector>

#include "semrl/observe/observe.hpp"

namespace semrl::langgen {

// Direction slices are taken relative to the agent's column: the middle slice
// is exactly the agent's column (its line of fire) and the slices to either
// side partition the remaining column offsets 1..width-1, the remainder going
// to the outermost slice. Distance bands partition |row - agent_row| the same
// way, band 0 being the farthest.
struct PatchGrid {
  int n_dir = 3;
  int n_dist = 3;

  int patch_count() const { return n_dir * n_dist; }
  int half() const { return n_dir / 2; }
  void validate() const;

  int dir_index(int width, int agent_col, int col) const;
  int dist_index(int height, int agent_row, int row) const;
  // Scan order: distance-major far to near, then direction left to right.
  int patch_index(int dir, int dist) const { return dist * n_dir + dir; }
  // Signed slice offset from the line of fire, used as the DIR lexicon key.
  int dir_offset(int dir) const { return dir - half(); }

  bool operator==(const PatchGrid&) const = default;
};

struct PatchSummary {
  int dir = 0;
  int dist = 0;
  std::array<int, world::kNumEntityClasses> counts{};

  bool empty() const;
  bool operator==(const PatchSummary&) const = default;
};

// What a sentence encodes: the agent's column plus per-patch class counts.
struct SceneSummary {
  int agent_col = 0;
  std::vector<PatchSummary> patches;  // scan order, size = grid.patch_count()

  bool operator==(const SceneSummary&) const = default;
};

SceneSummary summarize(const observe::ObjectList& objects, const PatchGrid& grid);

}  // namespace semrl::langgen
