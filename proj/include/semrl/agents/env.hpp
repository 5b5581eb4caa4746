#pragma once

#include <cstdint>
#include <vector>

#include "semrl/neural/layers.hpp"

namespace semrl::agents {

enum class ObsLayout { kFeatures, kImage, kTokens };

struct ObsSpec {
  ObsLayout layout = ObsLayout::kFeatures;
  nn::Shape sample_shape;   // features {n}, image {C,H,W}
  float byte_scale = 1.0f;  // image bytes are multiplied by this
  int token_length = 0;     // L_max for token observations
  int vocab_size = 0;
};

// Compact storage: image observations as bytes, sentences as their true
// tokens only (padding is restored when a batch is built).
struct Observation {
  std::vector<float> features;
  std::vector<std::uint8_t> bytes;
  std::vector<std::uint16_t> tokens;

  bool operator==(const Observation&) const = default;
};

struct EnvStep {
  Observation obs;
  double reward = 0.0;
  bool terminal = false;   // absorbing: no bootstrap past this step
  bool truncated = false;  // time limit hit in a non-terminal state
};

class Environment {
 public:
  virtual ~Environment() = default;
  virtual const ObsSpec& spec() const = 0;
  virtual int num_actions() const = 0;
  virtual Observation reset(std::uint64_t seed) = 0;
  virtual EnvStep step(int action) = 0;
};

// Stacks observations into an encoder batch; token rows are PAD-filled to
// spec.token_length.
nn::Batch make_batch(const ObsSpec& spec, const std::vector<const Observation*>& obs);

// Encoder matching an observation layout, with the shared hyperparameters
// taken from `base` (hidden sizes, CNN shapes, embedding mode).
nn::EncoderSpec encoder_for(const ObsSpec& spec, nn::EncoderSpec base);

}  // namespace semrl::agents
