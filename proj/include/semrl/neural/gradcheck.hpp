#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "semrl/neural/tensor.hpp"

namespace semrl::nn {

inline constexpr double kFdStep = 1e-4;
inline constexpr double kGradTolerance = 1e-3;
// Denominator floor of the relative error, so entries whose true gradient is
// zero are judged by absolute error.
inline constexpr double kRelErrorFloor = 1e-6;

struct GradCheckResult {
  std::string name;
  double max_rel_error = 0.0;
  double max_abs_error = 0.0;
  std::size_t checked = 0;
  bool passed = false;
};

double relative_error(double analytic, double numeric);

// Elements that are constants by construction (e.g. the frozen PAD embedding
// row) and must not be perturbed.
using FrozenPredicate = std::function<bool(const Tensor<double>& input, std::size_t element)>;

// Analytic gradient of `loss` (via backward) against central differences for
// every element of every tensor in `inputs`.
GradCheckResult check_gradients(const std::string& name, const std::function<Tensor<double>()>& loss,
                                std::vector<Tensor<double>> inputs, double h = kFdStep,
                                double tolerance = kGradTolerance, const FrozenPredicate& frozen = {});

// The whole oracle suite: every differentiable op plus the full encoders.
std::vector<GradCheckResult> run_gradcheck_suite(std::uint64_t seed = 1);

}  // namespace semrl::nn
