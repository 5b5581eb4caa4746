#include "semrl/neural/layers.hpp"

#include <algorithm>
#include <cmath>

#include "semrl/core/error.hpp"

namespace semrl::nn {

namespace {

template <typename T>
Tensor<T> uniform_param(Shape shape, double bound, rng::Engine& init, std::string name) {
  std::vector<T> w(numel(shape));
  for (auto& v : w) v = static_cast<T>(rng::uniform(init, -bound, bound));
  return Tensor<T>::param(std::move(shape), std::move(w), std::move(name));
}

template <typename T>
Tensor<T> dense_input(const Batch& batch, const Shape& per_sample) {
  if (batch.is_tokens()) throw UsageError("encoder expects dense observations, got tokens");
  if (batch.sample_shape != per_sample) {
    throw ShapeError("encoder expects samples of shape " + shape_str(per_sample) + ", got " +
                     shape_str(batch.sample_shape));
  }
  Shape s{batch.size};
  s.insert(s.end(), per_sample.begin(), per_sample.end());
  if (batch.dense.size() != numel(s)) throw ShapeError("batch holds " + std::to_string(batch.dense.size()) +
                                                       " values for shape " + shape_str(s));
  return Tensor<T>::from(std::move(s), std::vector<T>(batch.dense.begin(), batch.dense.end()));
}

}  // namespace

template <typename T>
std::size_t Module<T>::parameter_count() const {
  std::size_t n = 0;
  for (const auto& p : parameters()) n += p.size();
  return n;
}

template <typename T>
Linear<T>::Linear(int in, int out, rng::Engine& init, const std::string& name)
    : w_(uniform_param<T>({out, in}, 1.0 / std::sqrt(static_cast<double>(in)), init, name + ".w")),
      b_(Tensor<T>::param({out}, std::vector<T>(static_cast<std::size_t>(out), T(0)), name + ".b")) {}

template <typename T>
Conv2d<T>::Conv2d(int in_channels, int filters, int kernel, int stride, int pad, rng::Engine& init,
                  const std::string& name)
    : w_(uniform_param<T>({filters, in_channels, kernel, kernel},
                          1.0 / std::sqrt(static_cast<double>(in_channels * kernel * kernel)), init, name + ".w")),
      b_(Tensor<T>::param({filters}, std::vector<T>(static_cast<std::size_t>(filters), T(0)), name + ".b")),
      stride_(stride),
      pad_(pad) {}

template <typename T>
MlpEncoder<T>::MlpEncoder(int inputs, const std::vector<int>& hidden, rng::Engine& init, const std::string& prefix)
    : inputs_(inputs), features_(inputs) {
  int in = inputs;
  for (std::size_t i = 0; i < hidden.size(); ++i) {
    layers_.emplace_back(in, hidden[i], init, prefix + ".fc" + std::to_string(i));
    in = hidden[i];
  }
  features_ = in;
}

template <typename T>
Tensor<T> MlpEncoder<T>::forward(const Batch& batch) const {
  auto h = dense_input<T>(batch, {inputs_});
  for (const auto& l : layers_) h = relu(l.forward(h));
  return h;
}

template <typename T>
std::vector<Tensor<T>> MlpEncoder<T>::parameters() const {
  std::vector<Tensor<T>> out;
  for (const auto& l : layers_) {
    for (const auto& p : l.parameters()) out.push_back(p);
  }
  return out;
}

template <typename T>
ImageCnn<T>::ImageCnn(const ImageCnnConfig& cfg, rng::Engine& init, const std::string& prefix)
    : cfg_(cfg),
      c1_(cfg.channels, cfg.filters1, 3, 2, 1, init, prefix + ".conv1"),
      c2_(cfg.filters1, cfg.filters2, 3, 2, 1, init, prefix + ".conv2") {
  const int h = c2_.output_size(c1_.output_size(cfg.height));
  const int w = c2_.output_size(c1_.output_size(cfg.width));
  flat_ = cfg.filters2 * h * w;
  fc_ = Linear<T>(flat_, cfg.hidden, init, prefix + ".fc");
}

template <typename T>
Tensor<T> ImageCnn<T>::forward(const Batch& batch) const {
  auto x = dense_input<T>(batch, {cfg_.channels, cfg_.height, cfg_.width});
  auto h = relu(c2_.forward(relu(c1_.forward(x))));
  return relu(fc_.forward(reshape(h, {batch.size, flat_})));
}

template <typename T>
std::vector<Tensor<T>> ImageCnn<T>::parameters() const {
  std::vector<Tensor<T>> out;
  for (const Module<T>* m : {static_cast<const Module<T>*>(&c1_), static_cast<const Module<T>*>(&c2_),
                             static_cast<const Module<T>*>(&fc_)}) {
    for (const auto& p : m->parameters()) out.push_back(p);
  }
  return out;
}

template <typename T>
TextCnn<T>::TextCnn(embed::EmbeddingTable<T> table, const TextCnnConfig& cfg, rng::Engine& init,
                    const std::string& prefix)
    : table_(std::move(table)), cfg_(cfg) {
  if (cfg.widths.empty() || cfg.filters < 1) throw ConfigError("text cnn needs filter widths and filters >= 1");
  table_.weights().set_name(prefix + ".embedding");
  const int d = table_.dim();
  for (int k : cfg.widths) {
    if (k < 1) throw ConfigError("text cnn filter width must be >= 1");
    const std::string name = prefix + ".conv" + std::to_string(k);
    w_.push_back(uniform_param<T>({cfg.filters, k, d}, 1.0 / std::sqrt(static_cast<double>(k * d)), init, name + ".w"));
    b_.push_back(Tensor<T>::param({cfg.filters}, std::vector<T>(static_cast<std::size_t>(cfg.filters), T(0)),
                                  name + ".b"));
  }
}

template <typename T>
Tensor<T> TextCnn<T>::forward(const Batch& batch) const {
  if (!batch.is_tokens()) throw UsageError("text cnn expects token observations");
  if (static_cast<int>(batch.lengths.size()) != batch.size ||
      batch.tokens.size() != static_cast<std::size_t>(batch.size) * batch.length) {
    throw ShapeError("token batch layout does not match its size");
  }
  const int kmax = *std::max_element(cfg_.widths.begin(), cfg_.widths.end());
  int longest = 0;
  for (int n : batch.lengths) {
    if (n < 0 || n > batch.length) throw ShapeError("token length outside the row");
    longest = std::max(longest, n);
  }
  // Only the columns any window can touch are embedded.
  const int L = std::max(longest, kmax);
  std::vector<int> ids(static_cast<std::size_t>(batch.size) * L, langgen::kPadId);
  const int keep = std::min(L, batch.length);
  for (int i = 0; i < batch.size; ++i) {
    std::copy_n(batch.tokens.begin() + static_cast<std::ptrdiff_t>(i) * batch.length, keep,
                ids.begin() + static_cast<std::ptrdiff_t>(i) * L);
  }
  const auto e = table_.lookup(ids, batch.size, L);
  std::vector<Tensor<T>> pooled;
  for (std::size_t j = 0; j < cfg_.widths.size(); ++j) {
    const int k = cfg_.widths[j];
    std::vector<int> windows(static_cast<std::size_t>(batch.size));
    for (int i = 0; i < batch.size; ++i) windows[i] = std::max(1, batch.lengths[i] - k + 1);
    // ReLU is monotone, so it commutes with the max.
    pooled.push_back(relu(max_over_time(conv1d(e, w_[j], b_[j], windows), windows)));
  }
  return pooled.size() == 1 ? pooled[0] : concat_cols(pooled);
}

template <typename T>
std::vector<Tensor<T>> TextCnn<T>::parameters() const {
  std::vector<Tensor<T>> out;
  if (table_.trainable()) out.push_back(table_.weights());
  for (std::size_t j = 0; j < w_.size(); ++j) {
    out.push_back(w_[j]);
    out.push_back(b_[j]);
  }
  return out;
}

template <typename T>
std::unique_ptr<Encoder<T>> make_encoder(const EncoderSpec& spec, rng::Engine& init, const std::string& prefix) {
  switch (spec.kind) {
    case EncoderKind::kMlp: return std::make_unique<MlpEncoder<T>>(spec.inputs, spec.hidden, init, prefix);
    case EncoderKind::kImage: return std::make_unique<ImageCnn<T>>(spec.image, init, prefix);
    case EncoderKind::kText: {
      auto table = spec.embedding == embed::Mode::kOneHot
                       ? embed::EmbeddingTable<T>::one_hot(spec.vocab_size)
                       : embed::EmbeddingTable<T>::learned(spec.vocab_size, spec.embedding_dim, init);
      return std::make_unique<TextCnn<T>>(std::move(table), spec.text, init, prefix);
    }
  }
  throw UsageError("unknown encoder kind");
}

template <typename T>
void copy_parameters(const Module<T>& from, Module<T>& to) {
  const auto src = from.parameters();
  auto dst = to.parameters();
  if (src.size() != dst.size()) throw ShapeError("copy_parameters: models differ in parameter count");
  for (std::size_t i = 0; i < src.size(); ++i) {
    if (src[i].shape() != dst[i].shape()) {
      throw ShapeError("copy_parameters: " + src[i].name() + " " + shape_str(src[i].shape()) + " vs " +
                       shape_str(dst[i].shape()));
    }
    dst[i].data() = src[i].data();
  }
}

template class Module<float>;
template class Module<double>;
template class Linear<float>;
template class Linear<double>;
template class Conv2d<float>;
template class Conv2d<double>;
template class MlpEncoder<float>;
template class MlpEncoder<double>;
template class ImageCnn<float>;
template class ImageCnn<double>;
template class TextCnn<float>;
template class TextCnn<double>;
template std::unique_ptr<Encoder<float>> make_encoder(const EncoderSpec&, rng::Engine&, const std::string&);
template std::unique_ptr<Encoder<double>> make_encoder(const EncoderSpec&, rng::Engine&, const std::string&);
template void copy_parameters(const Module<float>&, Module<float>&);
template void copy_parameters(const Module<double>&, Module<double>&);

}  // namespace semrl::nn
