#include "semrl/agents/env.hpp"

#include <algorithm>

#include "semrl/core/error.hpp"
#include "semrl/langgen/vocabulary.hpp"

namespace semrl::agents {

nn::Batch make_batch(const ObsSpec& spec, const std::vector<const Observation*>& obs) {
  nn::Batch b;
  b.size = static_cast<int>(obs.size());
  if (spec.layout == ObsLayout::kTokens) {
    if (spec.token_length < 1) throw ConfigError("token observations need a positive L_max");
    b.length = spec.token_length;
    b.tokens.assign(static_cast<std::size_t>(b.size) * b.length, langgen::kPadId);
    b.lengths.resize(obs.size());
    for (std::size_t i = 0; i < obs.size(); ++i) {
      const auto& t = obs[i]->tokens;
      if (static_cast<int>(t.size()) > b.length) throw ShapeError("sentence longer than L_max");
      std::copy(t.begin(), t.end(), b.tokens.begin() + static_cast<std::ptrdiff_t>(i * b.length));
      b.lengths[i] = static_cast<int>(t.size());
    }
    return b;
  }
  b.sample_shape = spec.sample_shape;
  const std::size_t n = nn::numel(spec.sample_shape);
  b.dense.resize(n * obs.size());
  for (std::size_t i = 0; i < obs.size(); ++i) {
    float* dst = b.dense.data() + i * n;
    if (spec.layout == ObsLayout::kFeatures) {
      if (obs[i]->features.size() != n) throw ShapeError("feature observation has the wrong size");
      std::copy(obs[i]->features.begin(), obs[i]->features.end(), dst);
    } else {
      if (obs[i]->bytes.size() != n) throw ShapeError("image observation has the wrong size");
      for (std::size_t j = 0; j < n; ++j) dst[j] = static_cast<float>(obs[i]->bytes[j]) * spec.byte_scale;
    }
  }
  return b;
}

nn::EncoderSpec encoder_for(const ObsSpec& spec, nn::EncoderSpec base) {
  switch (spec.layout) {
    case ObsLayout::kFeatures:
      base.kind = nn::EncoderKind::kMlp;
      base.inputs = static_cast<int>(nn::numel(spec.sample_shape));
      break;
    case ObsLayout::kImage:
      if (spec.sample_shape.size() != 3) throw ShapeError("image spec must be {C,H,W}");
      base.kind = nn::EncoderKind::kImage;
      base.image.channels = spec.sample_shape[0];
      base.image.height = spec.sample_shape[1];
      base.image.width = spec.sample_shape[2];
      break;
    case ObsLayout::kTokens:
      base.kind = nn::EncoderKind::kText;
      base.vocab_size = spec.vocab_size;
      break;
  }
  return base;
}

}  // namespace semrl::agents
