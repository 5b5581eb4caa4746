#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "semrl/core/rng.hpp"
#include "semrl/embed/embedding.hpp"
#include "semrl/neural/ops.hpp"

namespace semrl::nn {

// A minibatch of observations in one of two layouts: dense float samples
// (images, segmentation maps, feature vectors) or padded token rows.
struct Batch {
  int size = 0;
  Shape sample_shape;       // dense: per-sample shape, e.g. {C,H,W}
  std::vector<float> dense;  // size x numel(sample_shape)
  int length = 0;            // tokens: row length
  std::vector<int> tokens;   // size x length
  std::vector<int> lengths;  // true length per row

  bool is_tokens() const { return length > 0; }
};

template <typename T>
class Module {
 public:
  virtual ~Module() = default;
  // Trainable tensors in a fixed order; names are unique within a model.
  virtual std::vector<Tensor<T>> parameters() const = 0;
  std::size_t parameter_count() const;
};

template <typename T>
class Linear : public Module<T> {
 public:
  Linear() = default;
  // Weights U(-1/sqrt(in), 1/sqrt(in)), bias 0.
  Linear(int in, int out, rng::Engine& init, const std::string& name);
  Tensor<T> forward(const Tensor<T>& x) const { return linear(x, w_, b_); }
  std::vector<Tensor<T>> parameters() const override { return {w_, b_}; }
  int in_features() const { return w_.dim(1); }
  int out_features() const { return w_.dim(0); }

 private:
  Tensor<T> w_, b_;
};

template <typename T>
class Conv2d : public Module<T> {
 public:
  Conv2d() = default;
  Conv2d(int in_channels, int filters, int kernel, int stride, int pad, rng::Engine& init, const std::string& name);
  Tensor<T> forward(const Tensor<T>& x) const { return conv2d(x, w_, b_, stride_, pad_); }
  std::vector<Tensor<T>> parameters() const override { return {w_, b_}; }
  int output_size(int in) const { return (in + 2 * pad_ - w_.dim(2)) / stride_ + 1; }

 private:
  Tensor<T> w_, b_;
  int stride_ = 1, pad_ = 0;
};

// Maps a Batch to a [batch, feature_dim] representation.
template <typename T>
class Encoder : public Module<T> {
 public:
  virtual Tensor<T> forward(const Batch& batch) const = 0;
  virtual int feature_dim() const = 0;
};

template <typename T>
class MlpEncoder : public Encoder<T> {
 public:
  MlpEncoder(int inputs, const std::vector<int>& hidden, rng::Engine& init, const std::string& prefix);
  Tensor<T> forward(const Batch& batch) const override;
  int feature_dim() const override { return features_; }
  std::vector<Tensor<T>> parameters() const override;

 private:
  std::vector<Linear<T>> layers_;
  int inputs_ = 0, features_ = 0;
};

struct ImageCnnConfig {
  int channels = 3;
  int height = 15;
  int width = 21;
  int filters1 = 16;
  int filters2 = 32;
  int hidden = 32;
};

// conv 3x3/2 -> ReLU -> conv 3x3/2 -> ReLU -> flatten -> FC hidden -> ReLU.
template <typename T>
class ImageCnn : public Encoder<T> {
 public:
  ImageCnn(const ImageCnnConfig& cfg, rng::Engine& init, const std::string& prefix);
  Tensor<T> forward(const Batch& batch) const override;
  int feature_dim() const override { return cfg_.hidden; }
  std::vector<Tensor<T>> parameters() const override;

 private:
  ImageCnnConfig cfg_;
  Conv2d<T> c1_, c2_;
  Linear<T> fc_;
  int flat_ = 0;
};

struct TextCnnConfig {
  std::vector<int> widths{3, 4, 5};
  int filters = 32;
};

// Embedding -> per-width valid conv over time -> max over time -> ReLU,
// concatenated. Windows are restricted to the true sentence length (window 0
// always counts), so trailing PAD never changes the output.
template <typename T>
class TextCnn : public Encoder<T> {
 public:
  TextCnn(embed::EmbeddingTable<T> table, const TextCnnConfig& cfg, rng::Engine& init, const std::string& prefix);
  Tensor<T> forward(const Batch& batch) const override;
  int feature_dim() const override { return cfg_.filters * static_cast<int>(cfg_.widths.size()); }
  std::vector<Tensor<T>> parameters() const override;
  const embed::EmbeddingTable<T>& table() const { return table_; }

 private:
  embed::EmbeddingTable<T> table_;
  TextCnnConfig cfg_;
  std::vector<Tensor<T>> w_, b_;
};

enum class EncoderKind { kMlp, kImage, kText };

struct EncoderSpec {
  EncoderKind kind = EncoderKind::kMlp;
  int inputs = 0;                 // Mlp
  std::vector<int> hidden{32};    // Mlp
  ImageCnnConfig image;           // Image
  TextCnnConfig text;             // Text
  embed::Mode embedding = embed::Mode::kLearned;
  int embedding_dim = embed::kDefaultDim;
  int vocab_size = 0;
};

template <typename T>
std::unique_ptr<Encoder<T>> make_encoder(const EncoderSpec& spec, rng::Engine& init, const std::string& prefix);

// Copies parameter values between structurally identical models.
template <typename T>
void copy_parameters(const Module<T>& from, Module<T>& to);

extern template class Linear<float>;
extern template class Linear<double>;
extern template class Conv2d<float>;
extern template class Conv2d<double>;
extern template class MlpEncoder<float>;
extern template class MlpEncoder<double>;
extern template class ImageCnn<float>;
extern template class ImageCnn<double>;
extern template class TextCnn<float>;
extern template class TextCnn<double>;

}  // namespace semrl::nn
