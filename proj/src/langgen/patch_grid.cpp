#include "semrl/langgen/patch_grid.hpp"

#include <algorithm>
#include <cstdlib>

#include "semrl/core/error.hpp"

namespace semrl::langgen {

void PatchGrid::validate() const {
  if (n_dir < 1 || n_dir % 2 == 0) throw ConfigError("patch grid: n_dir must be odd and >= 1");
  if (n_dist < 1) throw ConfigError("patch grid: n_dist must be >= 1");
}

namespace {

// Index in [0, slots) for a magnitude in [0, extent); slot width is
// extent / slots (at least 1) and the last slot takes the remainder.
int band(int magnitude, int extent, int slots) {
  const int size = std::max(1, extent / slots);
  return std::min(slots - 1, magnitude / size);
}

}  // namespace

int PatchGrid::dir_index(int width, int agent_col, int col) const {
  if (n_dir == 1) return 0;
  const int dx = col - agent_col;
  if (dx == 0) return half();
  const int j = band(std::abs(dx) - 1, width - 1, half());
  return dx < 0 ? half() - 1 - j : half() + 1 + j;
}

int PatchGrid::dist_index(int height, int agent_row, int row) const {
  const int reach = std::max(agent_row, height - 1 - agent_row) + 1;
  const int near = band(std::abs(row - agent_row), reach, n_dist);
  return n_dist - 1 - near;
}

bool PatchSummary::empty() const {
  return std::all_of(counts.begin(), counts.end(), [](int c) { return c == 0; });
}

SceneSummary summarize(const observe::ObjectList& objects, const PatchGrid& grid) {
  grid.validate();
  SceneSummary out;
  out.agent_col = objects.agent_col;
  out.patches.resize(static_cast<std::size_t>(grid.patch_count()));
  for (int dist = 0; dist < grid.n_dist; ++dist) {
    for (int dir = 0; dir < grid.n_dir; ++dir) {
      auto& p = out.patches[static_cast<std::size_t>(grid.patch_index(dir, dist))];
      p.dir = dir;
      p.dist = dist;
    }
  }
  for (const auto& r : objects.records) {
    const int dir = grid.dir_index(objects.width, objects.agent_col, r.col);
    const int dist = grid.dist_index(objects.height, objects.agent_row, r.row);
    ++out.patches[static_cast<std::size_t>(grid.patch_index(dir, dist))].counts[static_cast<std::size_t>(r.cls)];
  }
  return out;
}

}  // namespace semrl::langgen
