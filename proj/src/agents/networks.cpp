#include "semrl/agents/networks.hpp"

namespace semrl::agents {

template <typename T>
QNetwork<T>::QNetwork(const nn::EncoderSpec& spec, int actions, rng::Engine& init, const std::string& prefix)
    : encoder_(nn::make_encoder<T>(spec, init, prefix + ".encoder")),
      head_(encoder_->feature_dim(), actions, init, prefix + ".head") {}

template <typename T>
nn::Tensor<T> QNetwork<T>::forward(const nn::Batch& batch) const {
  return head_.forward(encoder_->forward(batch));
}

template <typename T>
std::vector<nn::Tensor<T>> QNetwork<T>::parameters() const {
  auto out = encoder_->parameters();
  for (const auto& p : head_.parameters()) out.push_back(p);
  return out;
}

template <typename T>
PolicyValueNet<T>::PolicyValueNet(const nn::EncoderSpec& spec, int actions, bool separate_encoders,
                                  rng::Engine& init, const std::string& prefix)
    : policy_encoder_(nn::make_encoder<T>(spec, init, prefix + (separate_encoders ? ".policy_encoder" : ".encoder"))) {
  if (separate_encoders) value_encoder_ = nn::make_encoder<T>(spec, init, prefix + ".value_encoder");
  policy_head_ = nn::Linear<T>(policy_encoder_->feature_dim(), actions, init, prefix + ".policy");
  const int vf = value_encoder_ ? value_encoder_->feature_dim() : policy_encoder_->feature_dim();
  value_head_ = nn::Linear<T>(vf, 1, init, prefix + ".value");
}

template <typename T>
typename PolicyValueNet<T>::Output PolicyValueNet<T>::forward(const nn::Batch& batch) const {
  const auto h = policy_encoder_->forward(batch);
  const auto hv = value_encoder_ ? value_encoder_->forward(batch) : h;
  return {policy_head_.forward(h), nn::reshape(value_head_.forward(hv), {batch.size})};
}

template <typename T>
std::vector<nn::Tensor<T>> PolicyValueNet<T>::parameters() const {
  auto out = policy_encoder_->parameters();
  if (value_encoder_) {
    for (const auto& p : value_encoder_->parameters()) out.push_back(p);
  }
  for (const auto& p : policy_head_.parameters()) out.push_back(p);
  for (const auto& p : value_head_.parameters()) out.push_back(p);
  return out;
}

template class QNetwork<float>;
template class QNetwork<double>;
template class PolicyValueNet<float>;
template class PolicyValueNet<double>;

}  // namespace semrl::agents
