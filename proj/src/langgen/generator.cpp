#include "semrl/langgen/generator.hpp"

#include <algorithm>

#include "semrl/core/error.hpp"

namespace semrl::langgen {

namespace {

using world::EntityClass;

void append(std::vector<std::string>& out, const Phrase& p) { out.insert(out.end(), p.begin(), p.end()); }

std::string count_token(int count) {
  if (count < 0 || count > kMaxCountToken) {
    throw UsageError("describe: count " + std::to_string(count) + " outside the digit vocabulary 0.." +
                     std::to_string(kMaxCountToken));
  }
  return std::to_string(count);
}

struct SlotValues {
  int count = 0;
  EntityClass cls = EntityClass::kEnemy;
  int dir_offset = 0;
  int dist = 0;
  int col = 0;
};

void render(std::vector<std::string>& out, const Pattern& pattern, const TemplateBank& bank, int variant,
            const SlotValues& v) {
  for (const auto& item : pattern) {
    if (!item.slot) {
      out.push_back(item.word);
      continue;
    }
    switch (*item.slot) {
      case Slot::kCount: out.push_back(count_token(v.count)); break;
      case Slot::kCol: out.push_back(count_token(v.col)); break;
      case Slot::kClass: {
        const auto& cw = bank.class_words(variant, v.cls);
        append(out, v.count == 1 ? cw.singular : cw.plural);
        break;
      }
      case Slot::kDir: append(out, bank.dir_phrase(variant, v.dir_offset)); break;
      case Slot::kDist: append(out, bank.dist_phrase(variant, v.dist)); break;
    }
  }
}

}  // namespace

std::string join(const std::vector<std::string>& words) {
  std::string s;
  for (const auto& w : words) {
    if (!s.empty()) s += ' ';
    s += w;
  }
  return s;
}

Description describe(const SceneSummary& scene, const PatchGrid& grid, const TemplateBank& bank,
                     rng::Engine& ambiguity, std::optional<int> forced_variant) {
  bank.check_supports(grid);
  if (static_cast<int>(scene.patches.size()) != grid.patch_count()) {
    throw UsageError("describe: scene has " + std::to_string(scene.patches.size()) + " patches, grid expects " +
                     std::to_string(grid.patch_count()));
  }
  if (forced_variant && (*forced_variant < 0 || *forced_variant >= TemplateBank::kVariantCount)) {
    throw UsageError("describe: variant " + std::to_string(*forced_variant) + " out of range");
  }
  auto pick = [&] {
    return forced_variant ? *forced_variant : rng::below(ambiguity, TemplateBank::kVariantCount);
  };

  Description d;
  const int sv = pick();
  d.variants.push_back(sv);
  SlotValues status;
  status.col = scene.agent_col;
  render(d.words, bank.variant(sv).status, bank, sv, status);

  for (const auto& patch : scene.patches) {
    const int v = pick();
    d.variants.push_back(v);
    const Variant& var = bank.variant(v);
    SlotValues sl;
    sl.dir_offset = grid.dir_offset(patch.dir);
    sl.dist = patch.dist;
    if (patch.empty()) {
      if (var.empty) render(d.words, *var.empty, bank, v, sl);
      continue;
    }
    for (int c = 0; c < world::kNumEntityClasses; ++c) {
      const int n = patch.counts[static_cast<std::size_t>(c)];
      if (n == 0) continue;
      sl.count = n;
      sl.cls = static_cast<EntityClass>(c);
      render(d.words, var.object, bank, v, sl);
    }
  }
  return d;
}

namespace {

enum class ClauseKind { kStatus, kObject, kEmpty };

struct Clause {
  ClauseKind kind = ClauseKind::kObject;
  SlotValues values;
  std::size_t end = 0;
};

class Parser {
 public:
  Parser(const std::vector<std::string>& words, const PatchGrid& grid, const TemplateBank& bank)
      : words_(words), grid_(grid), bank_(bank), dead_(words.size() + 1, false) {}

  std::optional<std::vector<Clause>> run() {
    std::vector<Clause> chain;
    for (int v = 0; v < TemplateBank::kVariantCount; ++v) {
      std::vector<Clause> found;
      match(bank_.variant(v).status, 0, v, ClauseKind::kStatus, 0, SlotValues{}, false, found);
      for (const auto& c : found) {
        chain = {c};
        if (rest(c.end, chain)) return chain;
      }
    }
    return std::nullopt;
  }

 private:
  // Clause sequence from `pos` to the end of the sentence.
  bool rest(std::size_t pos, std::vector<Clause>& chain) {
    if (pos == words_.size()) return true;
    if (dead_[pos]) return false;
    for (int v = 0; v < TemplateBank::kVariantCount; ++v) {
      const Variant& var = bank_.variant(v);
      std::vector<Clause> found;
      match(var.object, 0, v, ClauseKind::kObject, pos, SlotValues{}, false, found);
      if (var.empty) match(*var.empty, 0, v, ClauseKind::kEmpty, pos, SlotValues{}, false, found);
      for (const auto& c : found) {
        chain.push_back(c);
        if (rest(c.end, chain)) return true;
        chain.pop_back();
      }
    }
    dead_[pos] = true;
    return false;
  }

  bool phrase_at(std::size_t pos, const Phrase& p) const {
    if (pos + p.size() > words_.size()) return false;
    return std::equal(p.begin(), p.end(), words_.begin() + static_cast<std::ptrdiff_t>(pos));
  }

  static std::optional<int> number(const std::string& w) {
    if (w.empty() || w.size() > 2 || !std::all_of(w.begin(), w.end(), ::isdigit)) return std::nullopt;
    if (w.size() == 2 && w[0] == '0') return std::nullopt;
    return std::stoi(w);
  }

  // Depth-first match of pattern[i..] at words_[pos..]; collects every complete match.
  void match(const Pattern& pat, std::size_t i, int v, ClauseKind kind, std::size_t pos, SlotValues vals,
             bool plural, std::vector<Clause>& out) const {
    if (i == pat.size()) {
      if (kind == ClauseKind::kObject) {
        const auto& cw = bank_.class_words(v, vals.cls);
        const bool ok = vals.count >= 1 && (vals.count == 1 ? (!plural || cw.plural == cw.singular)
                                                             : (plural || cw.plural == cw.singular));
        if (!ok) return;
      }
      out.push_back(Clause{kind, vals, pos});
      return;
    }
    const PatternItem& item = pat[i];
    if (!item.slot) {
      if (pos < words_.size() && words_[pos] == item.word) match(pat, i + 1, v, kind, pos + 1, vals, plural, out);
      return;
    }
    switch (*item.slot) {
      case Slot::kCount:
      case Slot::kCol: {
        if (pos >= words_.size()) return;
        auto n = number(words_[pos]);
        if (!n) return;
        (*item.slot == Slot::kCount ? vals.count : vals.col) = *n;
        match(pat, i + 1, v, kind, pos + 1, vals, plural, out);
        return;
      }
      case Slot::kClass:
        for (int c = 0; c < world::kNumEntityClasses; ++c) {
          const auto& cw = bank_.class_words(v, static_cast<EntityClass>(c));
          vals.cls = static_cast<EntityClass>(c);
          if (phrase_at(pos, cw.singular)) match(pat, i + 1, v, kind, pos + cw.singular.size(), vals, false, out);
          if (cw.plural != cw.singular && phrase_at(pos, cw.plural)) {
            match(pat, i + 1, v, kind, pos + cw.plural.size(), vals, true, out);
          }
        }
        return;
      case Slot::kDir:
        for (int k = -grid_.half(); k <= grid_.half(); ++k) {
          const auto& p = bank_.dir_phrase(v, k);
          vals.dir_offset = k;
          if (phrase_at(pos, p)) match(pat, i + 1, v, kind, pos + p.size(), vals, plural, out);
        }
        return;
      case Slot::kDist:
        for (int b = 0; b < grid_.n_dist; ++b) {
          const auto& p = bank_.dist_phrase(v, b);
          vals.dist = b;
          if (phrase_at(pos, p)) match(pat, i + 1, v, kind, pos + p.size(), vals, plural, out);
        }
        return;
    }
  }

  const std::vector<std::string>& words_;
  const PatchGrid& grid_;
  const TemplateBank& bank_;
  std::vector<bool> dead_;
};

}  // namespace

std::optional<SceneSummary> parse_description(const std::vector<std::string>& words, const PatchGrid& grid,
                                              const TemplateBank& bank) {
  bank.check_supports(grid);
  Parser parser(words, grid, bank);
  auto clauses = parser.run();
  if (!clauses) return std::nullopt;

  SceneSummary scene;
  scene.patches.resize(static_cast<std::size_t>(grid.patch_count()));
  for (int dist = 0; dist < grid.n_dist; ++dist) {
    for (int dir = 0; dir < grid.n_dir; ++dir) {
      auto& p = scene.patches[static_cast<std::size_t>(grid.patch_index(dir, dist))];
      p.dir = dir;
      p.dist = dist;
    }
  }
  for (const auto& c : *clauses) {
    switch (c.kind) {
      case ClauseKind::kStatus: scene.agent_col = c.values.col; break;
      case ClauseKind::kEmpty: break;
      case ClauseKind::kObject: {
        const int dir = c.values.dir_offset + grid.half();
        auto& slot = scene.patches[static_cast<std::size_t>(grid.patch_index(dir, c.values.dist))]
                         .counts[static_cast<std::size_t>(c.values.cls)];
        if (slot != 0) return std::nullopt;
        slot = c.values.count;
        break;
      }
    }
  }
  return scene;
}

namespace {

int pattern_length(const Pattern& pat, const TemplateBank& bank, int v, EntityClass cls, int dir_offset,
                   int dist) {
  int n = 0;
  for (const auto& item : pat) {
    if (!item.slot) {
      ++n;
      continue;
    }
    switch (*item.slot) {
      case Slot::kCount:
      case Slot::kCol: ++n; break;
      case Slot::kClass: {
        const auto& cw = bank.class_words(v, cls);
        n += static_cast<int>(std::max(cw.singular.size(), cw.plural.size()));
        break;
      }
      case Slot::kDir: n += static_cast<int>(bank.dir_phrase(v, dir_offset).size()); break;
      case Slot::kDist: n += static_cast<int>(bank.dist_phrase(v, dist).size()); break;
    }
  }
  return n;
}

}  // namespace

int max_sentence_length(const TemplateBank& bank, const PatchGrid& grid) {
  bank.check_supports(grid);
  int status = 0;
  for (const auto& var : bank.variants()) {
    status = std::max(status, pattern_length(var.status, bank, var.id, EntityClass::kEnemy, 0, 0));
  }
  int total = status;
  for (int dist = 0; dist < grid.n_dist; ++dist) {
    for (int dir = 0; dir < grid.n_dir; ++dir) {
      int worst = 0;
      for (const auto& var : bank.variants()) {
        const int off = grid.dir_offset(dir);
        int full = 0;
        for (int c = 0; c < world::kNumEntityClasses; ++c) {
          full += pattern_length(var.object, bank, var.id, static_cast<EntityClass>(c), off, dist);
        }
        const int empty = var.empty ? pattern_length(*var.empty, bank, var.id, EntityClass::kEnemy, off, dist) : 0;
        worst = std::max({worst, full, empty});
      }
      total += worst;
    }
  }
  return total;
}

}  // namespace semrl::langgen
