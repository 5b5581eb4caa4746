#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <unordered_map>
#include <vector>

#include "semrl/langgen/template_bank.hpp"

namespace semrl::langgen {

inline constexpr int kPadId = 0;
inline constexpr int kOovId = 1;
inline constexpr int kMaxCountToken = 99;

// word <-> index. Index 0 is <pad>, 1 is <oov>, then the digit tokens 0..99,
// then the template closure in lexicographic order.
class Vocabulary {
 public:
  static Vocabulary from_bank(const TemplateBank& bank);
  static Vocabulary from_words(const std::vector<std::string>& index_ordered);

  int size() const { return static_cast<int>(words_.size()); }
  // Case-insensitive; unknown words map to kOovId.
  int index(const std::string& word) const;
  bool contains(const std::string& word) const;
  const std::string& word(int id) const { return words_.at(static_cast<std::size_t>(id)); }
  const std::vector<std::string>& words() const { return words_; }
  std::uint64_t hash() const;

  // One word per line in index order.
  void write(std::ostream& out) const;

 private:
  std::vector<std::string> words_;
  std::unordered_map<std::string, int> index_;
};

struct TokenSeq {
  std::vector<std::uint16_t> ids;  // length L_max, PAD-filled past true_length
  int true_length = 0;
  bool truncated = false;

  int max_length() const { return static_cast<int>(ids.size()); }
  bool operator==(const TokenSeq&) const = default;
};

TokenSeq tokenize(const std::vector<std::string>& words, const Vocabulary& vocab, int max_length);
std::vector<std::string> detokenize(const TokenSeq& seq, const Vocabulary& vocab);

}  // namespace semrl::langgen
