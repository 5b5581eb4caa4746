#pragma once

#include <string_view>
#include <vector>

#include "semrl/core/rng.hpp"
#include "semrl/langgen/vocabulary.hpp"
#include "semrl/neural/tensor.hpp"

namespace semrl::embed {

enum class Mode { kOneHot, kLearned };

Mode parse_mode(std::string_view s);
std::string_view to_string(Mode m);

inline constexpr int kDefaultDim = 32;
inline constexpr double kInitRange = 0.05;

// |D| x d word table. OneHot is the fixed identity (bag of words, d = |D|);
// Learned rows are trainable with the PAD row pinned at zero.
template <typename T>
class EmbeddingTable {
 public:
  static EmbeddingTable one_hot(int vocab_size);
  static EmbeddingTable learned(int vocab_size, int dim, rng::Engine& init);

  Mode mode() const { return mode_; }
  int dim() const { return weights_.dim(1); }
  int vocab_size() const { return weights_.dim(0); }
  bool trainable() const { return mode_ == Mode::kLearned; }

  nn::Tensor<T>& weights() { return weights_; }
  const nn::Tensor<T>& weights() const { return weights_; }

  // ids holds batch x length token ids -> [batch, length, d].
  nn::Tensor<T> lookup(const std::vector<int>& ids, int batch, int length) const;

 private:
  Mode mode_ = Mode::kLearned;
  nn::Tensor<T> weights_;
};

// One sequence -> [L_max, d].
template <typename T>
nn::Tensor<T> embed(const langgen::TokenSeq& seq, const EmbeddingTable<T>& table);

extern template class EmbeddingTable<float>;
extern template class EmbeddingTable<double>;

}  // namespace semrl::embed
