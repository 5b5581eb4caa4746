#include "semrl/embed/embedding.hpp"

#include "semrl/core/error.hpp"
#include "semrl/neural/ops.hpp"

namespace semrl::embed {

Mode parse_mode(std::string_view s) {
  if (s == "onehot" || s == "bow") return Mode::kOneHot;
  if (s == "learned") return Mode::kLearned;
  throw ConfigError("unknown embedding mode '" + std::string(s) + "' (onehot|learned)");
}

std::string_view to_string(Mode m) { return m == Mode::kOneHot ? "onehot" : "learned"; }

template <typename T>
EmbeddingTable<T> EmbeddingTable<T>::one_hot(int vocab_size) {
  if (vocab_size < 2) throw UsageError("embedding: vocabulary too small");
  std::vector<T> w(static_cast<std::size_t>(vocab_size) * vocab_size, T(0));
  for (int i = 1; i < vocab_size; ++i) w[static_cast<std::size_t>(i) * vocab_size + i] = T(1);
  EmbeddingTable t;
  t.mode_ = Mode::kOneHot;
  t.weights_ = nn::Tensor<T>::from({vocab_size, vocab_size}, std::move(w));
  t.weights_.set_name("embedding");
  return t;
}

template <typename T>
EmbeddingTable<T> EmbeddingTable<T>::learned(int vocab_size, int dim, rng::Engine& init) {
  if (vocab_size < 2 || dim < 1) throw UsageError("embedding: bad table size");
  std::vector<T> w(static_cast<std::size_t>(vocab_size) * dim, T(0));
  for (std::size_t i = static_cast<std::size_t>(dim); i < w.size(); ++i) {
    w[i] = static_cast<T>(rng::uniform(init, -kInitRange, kInitRange));
  }
  EmbeddingTable t;
  t.mode_ = Mode::kLearned;
  t.weights_ = nn::Tensor<T>::param({vocab_size, dim}, std::move(w), "embedding");
  return t;
}

template <typename T>
nn::Tensor<T> EmbeddingTable<T>::lookup(const std::vector<int>& ids, int batch, int length) const {
  return nn::embedding_lookup(weights_, ids, batch, length, langgen::kPadId);
}

template <typename T>
nn::Tensor<T> embed(const langgen::TokenSeq& seq, const EmbeddingTable<T>& table) {
  std::vector<int> ids(seq.ids.begin(), seq.ids.end());
  auto e = table.lookup(ids, 1, seq.max_length());
  return nn::reshape(e, {seq.max_length(), table.dim()});
}

template class EmbeddingTable<float>;
template class EmbeddingTable<double>;
template nn::Tensor<float> embed(const langgen::TokenSeq&, const EmbeddingTable<float>&);
template nn::Tensor<double> embed(const langgen::TokenSeq&, const EmbeddingTable<double>&);

}  // namespace semrl::embed
