#include "semrl/langgen/vocabulary.hpp"

#include <algorithm>
#include <ostream>

#include "semrl/core/error.hpp"
#include "semrl/core/hash.hpp"

namespace semrl::langgen {

namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

}  // namespace

Vocabulary Vocabulary::from_words(const std::vector<std::string>& index_ordered) {
  Vocabulary v;
  for (const auto& w : index_ordered) {
    const auto lw = lower(w);
    if (v.index_.count(lw) != 0) throw ConfigError("vocabulary: duplicate word '" + lw + "'");
    v.index_[lw] = static_cast<int>(v.words_.size());
    v.words_.push_back(lw);
  }
  if (v.words_.size() < 2 || v.words_[0] != "<pad>" || v.words_[1] != "<oov>") {
    throw ConfigError("vocabulary must start with <pad>, <oov>");
  }
  if (v.words_.size() > 65535) throw ConfigError("vocabulary too large for 16-bit token ids");
  return v;
}

Vocabulary Vocabulary::from_bank(const TemplateBank& bank) {
  std::vector<std::string> words{"<pad>", "<oov>"};
  for (int n = 0; n <= kMaxCountToken; ++n) words.push_back(std::to_string(n));
  for (const auto& w : bank.closure_words()) {
    if (std::find(words.begin(), words.end(), w) == words.end()) words.push_back(w);
  }
  return from_words(words);
}

int Vocabulary::index(const std::string& word) const {
  auto it = index_.find(lower(word));
  return it == index_.end() ? kOovId : it->second;
}

bool Vocabulary::contains(const std::string& word) const { return index_.count(lower(word)) != 0; }

std::uint64_t Vocabulary::hash() const {
  Fnv1a h;
  for (const auto& w : words_) h.update(w).update("\n");
  return h.digest();
}

void Vocabulary::write(std::ostream& out) const {
  for (const auto& w : words_) out << w << '\n';
}

TokenSeq tokenize(const std::vector<std::string>& words, const Vocabulary& vocab, int max_length) {
  if (max_length < 1) throw UsageError("tokenize: max_length must be >= 1");
  TokenSeq seq;
  seq.ids.assign(static_cast<std::size_t>(max_length), kPadId);
  const auto n = std::min(words.size(), static_cast<std::size_t>(max_length));
  for (std::size_t i = 0; i < n; ++i) seq.ids[i] = static_cast<std::uint16_t>(vocab.index(words[i]));
  seq.true_length = static_cast<int>(n);
  seq.truncated = words.size() > static_cast<std::size_t>(max_length);
  return seq;
}

std::vector<std::string> detokenize(const TokenSeq& seq, const Vocabulary& vocab) {
  std::vector<std::string> out;
  out.reserve(static_cast<std::size_t>(seq.true_length));
  for (int i = 0; i < seq.true_length; ++i) out.push_back(vocab.word(seq.ids[static_cast<std::size_t>(i)]));
  return out;
}

}  // namespace semrl::langgen
