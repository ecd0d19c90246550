#pragma once

#include <cstdint>
#include <vector>

#include "caac/nn/params.hpp"

namespace caac::nn {

struct AdamState {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::int64_t step = 0;
  Gradients first_moment;
  Gradients second_moment;

  AdamState() = default;
  AdamState(const ParameterSet& params, double lr);
};

/// One bias-corrected Adam descent step: params -= lr * m_hat / (sqrt(v_hat) + eps).
void adam_step(ParameterSet& params, const Gradients& grads, AdamState& state);

}  // namespace caac::nn
