#include "semrl/neural/optim.hpp"

#include <algorithm>
#include <cmath>

#include "semrl/core/error.hpp"

namespace semrl::nn {

template <typename T>
Adam<T>::Adam(std::vector<Tensor<T>> params, AdamConfig cfg) : params_(std::move(params)), cfg_(cfg) {
  for (const auto& p : params_) {
    m_.emplace_back(p.size(), 0.0);
    v_.emplace_back(p.size(), 0.0);
  }
}

template <typename T>
void Adam<T>::step() {
  for (const auto& p : params_) {
    for (T g : p.grad()) {
      if (!std::isfinite(static_cast<double>(g))) throw TrainingError("non-finite gradient in parameter " + p.name());
    }
  }
  ++t_;
  const double c1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
  for (std::size_t i = 0; i < params_.size(); ++i) {
    auto& p = params_[i];
    if (p.grad().empty()) continue;
    auto& m = m_[i];
    auto& v = v_[i];
    for (std::size_t j = 0; j < p.size(); ++j) {
      const double g = static_cast<double>(p.grad()[j]);
      m[j] = cfg_.beta1 * m[j] + (1.0 - cfg_.beta1) * g;
      v[j] = cfg_.beta2 * v[j] + (1.0 - cfg_.beta2) * g * g;
      const double mh = m[j] / c1, vh = v[j] / c2;
      p.data()[j] = static_cast<T>(static_cast<double>(p.data()[j]) - cfg_.lr * mh / (std::sqrt(vh) + cfg_.eps));
    }
    // Consumed; a parameter missing from the next graph must not reuse it.
    std::fill(p.grad().begin(), p.grad().end(), T(0));
  }
}

template <typename T>
double clip_grad_norm(std::vector<Tensor<T>>& params, double max_norm) {
  double sq = 0.0;
  for (const auto& p : params) {
    for (T g : p.grad()) sq += static_cast<double>(g) * g;
  }
  const double norm = std::sqrt(sq);
  if (norm > max_norm && norm > 0.0) {
    const T s = static_cast<T>(max_norm / norm);
    for (auto& p : params) {
      for (auto& g : p.grad()) g *= s;
    }
  }
  return norm;
}

template class Adam<float>;
template class Adam<double>;
template double clip_grad_norm(std::vector<Tensor<float>>&, double);
template double clip_grad_norm(std::vector<Tensor<double>>&, double);

}  // namespace semrl::nn
