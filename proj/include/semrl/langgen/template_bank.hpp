#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "semrl/langgen/patch_grid.hpp"

namespace semrl::langgen {

using Phrase = std::vector<std::string>;

enum class Slot { kCount, kClass, kDir, kDist, kCol };

// One element of a clause pattern: a literal word or a slot.
struct PatternItem {
  std::optional<Slot> slot;
  std::string word;

  bool operator==(const PatternItem&) const = default;
};
using Pattern = std::vector<PatternItem>;

struct ClassWords {
  Phrase singular;
  Phrase plural;
  bool operator==(const ClassWords&) const = default;
};

struct Lexicon {
  std::array<std::optional<ClassWords>, world::kNumEntityClasses> classes;
  std::map<int, Phrase> dir;   // keyed by signed slice offset
  std::map<int, Phrase> dist;  // keyed by band index, 0 = farthest
};

struct Variant {
  int id = 0;
  Pattern status;
  Pattern object;
  std::optional<Pattern> empty;
  Lexicon overrides;
};

// The ten sentence generators plus their phrase lexicons.
class TemplateBank {
 public:
  static constexpr int kVariantCount = 10;

  static TemplateBank parse(const std::string& text);
  static TemplateBank load(const std::filesystem::path& path);
  // Bank shipped with the project (data/templates.txt), located via SEMRL_DATA_DIR
  // or the compiled-in source path.
  static TemplateBank load_default();

  const std::vector<Variant>& variants() const { return variants_; }
  const Variant& variant(int v) const { return variants_.at(static_cast<std::size_t>(v)); }

  // Effective lexicon entries for one variant.
  const ClassWords& class_words(int variant, world::EntityClass cls) const;
  const Phrase& dir_phrase(int variant, int offset) const;
  const Phrase& dist_phrase(int variant, int band) const;

  // Throws ConfigError if the grid needs a DIR/DIST entry the bank lacks.
  void check_supports(const PatchGrid& grid) const;
  int max_dir_offset() const;
  int dist_levels() const;

  // Every word any variant can emit for any supported grid (digits excluded).
  std::vector<std::string> closure_words() const;
  const std::string& source_text() const { return source_; }

 private:
  Lexicon shared_;
  std::vector<Variant> variants_;
  std::string source_;
};

std::filesystem::path default_data_dir();

}  // namespace semrl::langgen
