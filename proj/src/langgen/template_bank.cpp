#include "semrl/langgen/template_bank.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "semrl/core/error.hpp"
#include "semrl/core/kv_config.hpp"

#ifndef SEMRL_SOURCE_DATA_DIR
#define SEMRL_SOURCE_DATA_DIR "data"
#endif

namespace semrl::langgen {

namespace {

Phrase words_of(const std::string& s) {
  Phrase out;
  std::istringstream in(s);
  std::string w;
  while (in >> w) {
    std::transform(w.begin(), w.end(), w.begin(), [](unsigned char c) { return std::tolower(c); });
    out.push_back(w);
  }
  return out;
}

Pattern parse_pattern(const std::string& line, int lineno) {
  Pattern p;
  for (const auto& tok : words_of(line)) {
    if (tok.front() == '{') {
      PatternItem item;
      if (tok == "{count}") item.slot = Slot::kCount;
      else if (tok == "{class}") item.slot = Slot::kClass;
      else if (tok == "{dir}") item.slot = Slot::kDir;
      else if (tok == "{dist}") item.slot = Slot::kDist;
      else if (tok == "{col}") item.slot = Slot::kCol;
      else throw ConfigError("template line " + std::to_string(lineno) + ": unknown slot " + tok);
      p.push_back(item);
    } else {
      p.push_back(PatternItem{std::nullopt, tok});
    }
  }
  return p;
}

bool has_slot(const Pattern& p, Slot s) {
  return std::any_of(p.begin(), p.end(), [s](const PatternItem& i) { return i.slot == s; });
}

int slot_count(const Pattern& p, Slot s) {
  return static_cast<int>(std::count_if(p.begin(), p.end(), [s](const PatternItem& i) { return i.slot == s; }));
}

world::EntityClass parse_class(const std::string& name, int lineno) {
  for (int c = 0; c < world::kNumEntityClasses; ++c) {
    if (world::to_string(static_cast<world::EntityClass>(c)) == name) return static_cast<world::EntityClass>(c);
  }
  throw ConfigError("template line " + std::to_string(lineno) + ": unknown class '" + name + "'");
}

int parse_int(const std::string& s, int lineno) {
  try {
    std::size_t pos = 0;
    int v = std::stoi(s, &pos);
    if (pos == s.size()) return v;
  } catch (const std::exception&) {
  }
  throw ConfigError("template line " + std::to_string(lineno) + ": bad index '" + s + "'");
}

}  // namespace

TemplateBank TemplateBank::parse(const std::string& text) {
  TemplateBank bank;
  bank.source_ = text;
  Variant* current = nullptr;
  std::istringstream in(text);
  std::string raw;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    if (auto h = raw.find('#'); h != std::string::npos) raw.erase(h);
    const std::string line = trim(raw);
    if (line.empty()) continue;

    const auto colon = line.find(':');
    const auto head = words_of(line.substr(0, colon == std::string::npos ? line.size() : colon));
    if (!head.empty() && head[0] == "variant" && colon == std::string::npos) {
      if (head.size() != 2) throw ConfigError("template line " + std::to_string(lineno) + ": VARIANT needs an id");
      const int id = parse_int(head[1], lineno);
      if (id != static_cast<int>(bank.variants_.size())) {
        throw ConfigError("template line " + std::to_string(lineno) + ": variants must be numbered 0,1,2,...");
      }
      bank.variants_.push_back(Variant{id, {}, {}, std::nullopt, {}});
      current = &bank.variants_.back();
      continue;
    }
    if (colon != std::string::npos && head.size() == 2 &&
        (head[0] == "class" || head[0] == "dir" || head[0] == "dist")) {
      Lexicon& lex = current != nullptr ? current->overrides : bank.shared_;
      const std::string body = line.substr(colon + 1);
      if (head[0] == "class") {
        const auto bar = body.find('|');
        if (bar == std::string::npos) {
          throw ConfigError("template line " + std::to_string(lineno) + ": CLASS needs 'singular | plural'");
        }
        // Class names are case-sensitive identifiers; recover the original spelling.
        const auto name = trim(line.substr(line.find_first_of(" \t"), colon - line.find_first_of(" \t")));
        ClassWords cw{words_of(body.substr(0, bar)), words_of(body.substr(bar + 1))};
        if (cw.singular.empty() || cw.plural.empty()) {
          throw ConfigError("template line " + std::to_string(lineno) + ": empty class phrase");
        }
        lex.classes[static_cast<std::size_t>(parse_class(name, lineno))] = cw;
      } else {
        auto phrase = words_of(body);
        if (phrase.empty()) throw ConfigError("template line " + std::to_string(lineno) + ": empty phrase");
        (head[0] == "dir" ? lex.dir : lex.dist)[parse_int(head[1], lineno)] = phrase;
      }
      continue;
    }
    if (current == nullptr) {
      throw ConfigError("template line " + std::to_string(lineno) + ": clause pattern outside a VARIANT block");
    }
    Pattern p = parse_pattern(line, lineno);
    const bool count = has_slot(p, Slot::kCount), cls = has_slot(p, Slot::kClass);
    const bool dir = has_slot(p, Slot::kDir), dist = has_slot(p, Slot::kDist);
    const bool col = has_slot(p, Slot::kCol);
    for (Slot s : {Slot::kCount, Slot::kClass, Slot::kDir, Slot::kDist, Slot::kCol}) {
      if (slot_count(p, s) > 1) throw ConfigError("template line " + std::to_string(lineno) + ": repeated slot");
    }
    auto dup = [&] { throw ConfigError("template line " + std::to_string(lineno) + ": duplicate clause kind"); };
    if (col && !count && !cls && !dir && !dist) {
      if (!current->status.empty()) dup();
      current->status = p;
    } else if (count && cls && dir && dist && !col) {
      if (!current->object.empty()) dup();
      current->object = p;
    } else if (dir && dist && !count && !cls && !col) {
      if (current->empty) dup();
      current->empty = p;
    } else {
      throw ConfigError("template line " + std::to_string(lineno) + ": cannot classify clause '" + line + "'");
    }
  }

  if (static_cast<int>(bank.variants_.size()) != kVariantCount) {
    throw ConfigError("template bank must define exactly " + std::to_string(kVariantCount) + " variants, found " +
                      std::to_string(bank.variants_.size()));
  }
  for (const auto& v : bank.variants_) {
    if (v.status.empty() || v.object.empty()) {
      throw ConfigError("variant " + std::to_string(v.id) + " needs a status clause and an object clause");
    }
    for (int c = 0; c < world::kNumEntityClasses; ++c) {
      bank.class_words(v.id, static_cast<world::EntityClass>(c));
    }
  }
  return bank;
}

TemplateBank TemplateBank::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open template bank " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

std::filesystem::path default_data_dir() {
  if (const char* env = std::getenv("SEMRL_DATA_DIR"); env != nullptr && *env != '\0') return env;
  return SEMRL_SOURCE_DATA_DIR;
}

TemplateBank TemplateBank::load_default() { return load(default_data_dir() / "templates.txt"); }

const ClassWords& TemplateBank::class_words(int variant, world::EntityClass cls) const {
  const auto c = static_cast<std::size_t>(cls);
  const auto& local = this->variant(variant).overrides.classes[c];
  if (local) return *local;
  if (shared_.classes[c]) return *shared_.classes[c];
  throw ConfigError("template bank: no words for class " + std::string(world::to_string(cls)) + " in variant " +
                    std::to_string(variant));
}

const Phrase& TemplateBank::dir_phrase(int variant, int offset) const {
  const auto& local = this->variant(variant).overrides.dir;
  if (auto it = local.find(offset); it != local.end()) return it->second;
  if (auto it = shared_.dir.find(offset); it != shared_.dir.end()) return it->second;
  throw ConfigError("template bank: no DIR entry for offset " + std::to_string(offset));
}

const Phrase& TemplateBank::dist_phrase(int variant, int band) const {
  const auto& local = this->variant(variant).overrides.dist;
  if (auto it = local.find(band); it != local.end()) return it->second;
  if (auto it = shared_.dist.find(band); it != shared_.dist.end()) return it->second;
  throw ConfigError("template bank: no DIST entry for band " + std::to_string(band));
}

int TemplateBank::max_dir_offset() const {
  int k = 0;
  while (shared_.dir.count(k + 1) != 0 && shared_.dir.count(-(k + 1)) != 0) ++k;
  return k;
}

int TemplateBank::dist_levels() const {
  int n = 0;
  while (shared_.dist.count(n) != 0) ++n;
  return n;
}

void TemplateBank::check_supports(const PatchGrid& grid) const {
  grid.validate();
  if (grid.half() > max_dir_offset()) {
    throw ConfigError("template bank supports at most " + std::to_string(2 * max_dir_offset() + 1) +
                      " direction slices, grid asks for " + std::to_string(grid.n_dir));
  }
  if (grid.n_dist != dist_levels()) {
    throw ConfigError("template bank defines " + std::to_string(dist_levels()) + " distance bands, grid asks for " +
                      std::to_string(grid.n_dist));
  }
  for (const auto& v : variants_) {
    for (int k = -grid.half(); k <= grid.half(); ++k) dir_phrase(v.id, k);
    for (int b = 0; b < grid.n_dist; ++b) dist_phrase(v.id, b);
  }
}

std::vector<std::string> TemplateBank::closure_words() const {
  std::set<std::string> words;
  auto add = [&](const Phrase& p) { words.insert(p.begin(), p.end()); };
  auto add_lex = [&](const Lexicon& lex) {
    for (const auto& cw : lex.classes) {
      if (cw) {
        add(cw->singular);
        add(cw->plural);
      }
    }
    for (const auto& [k, p] : lex.dir) add(p);
    for (const auto& [k, p] : lex.dist) add(p);
  };
  add_lex(shared_);
  for (const auto& v : variants_) {
    add_lex(v.overrides);
    for (const Pattern* p : {&v.status, &v.object}) {
      for (const auto& item : *p) {
        if (!item.slot) words.insert(item.word);
      }
    }
    if (v.empty) {
      for (const auto& item : *v.empty) {
        if (!item.slot) words.insert(item.word);
      }
    }
  }
  return {words.begin(), words.end()};
}

}  // namespace semrl::langgen
