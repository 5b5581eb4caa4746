#pragma once

#include <optional>
#include <string>
#include <vector>

#include "semrl/core/rng.hpp"
#include "semrl/langgen/template_bank.hpp"
#include "semrl/langgen/vocabulary.hpp"

namespace semrl::langgen {

struct Description {
  std::vector<std::string> words;
  // Variant used for the status clause followed by one entry per patch.
  std::vector<int> variants;
};

// Emits the status clause, then walks the patches in scan order drawing one
// variant per patch from `ambiguity` (1 + patch_count draws per call) unless
// `forced_variant` pins every choice. Non-empty patches emit one object clause
// per class present; empty patches emit the variant's empty clause if it has one.
Description describe(const SceneSummary& scene, const PatchGrid& grid, const TemplateBank& bank,
                     rng::Engine& ambiguity, std::optional<int> forced_variant = std::nullopt);

// Inverse grammar: recovers the scene summary from a sentence produced by any
// mixture of variants. Returns nullopt if the words do not parse.
std::optional<SceneSummary> parse_description(const std::vector<std::string>& words, const PatchGrid& grid,
                                              const TemplateBank& bank);

// Longest sentence any variant mixture can produce for the grid; sizing L_max
// to this bound guarantees no truncation.
int max_sentence_length(const TemplateBank& bank, const PatchGrid& grid);

std::string join(const std::vector<std::string>& words);

}  // namespace semrl::langgen
