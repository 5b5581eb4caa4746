#pragma once

#include <cstdint>
#include <vector>

#include "semrl/neural/tensor.hpp"

namespace semrl::nn {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Adam with bias correction. Moments are kept in double.
template <typename T>
class Adam {
 public:
  Adam(std::vector<Tensor<T>> params, AdamConfig cfg = {});

  // Applies one update from the current grads. A non-finite gradient throws
  // TrainingError naming the parameter, before any parameter is touched.
  void step();
  std::int64_t steps() const { return t_; }
  const AdamConfig& config() const { return cfg_; }
  const std::vector<Tensor<T>>& params() const { return params_; }
  const std::vector<std::vector<double>>& first_moments() const { return m_; }
  const std::vector<std::vector<double>>& second_moments() const { return v_; }

 private:
  std::vector<Tensor<T>> params_;
  AdamConfig cfg_;
  std::vector<std::vector<double>> m_, v_;
  std::int64_t t_ = 0;
};

// Rescales grads so their global L2 norm is at most max_norm; returns the
// norm before scaling. Params without grads are skipped.
template <typename T>
double clip_grad_norm(std::vector<Tensor<T>>& params, double max_norm);

extern template class Adam<float>;
extern template class Adam<double>;

}  // namespace semrl::nn
