#include "caac/nn/adam.hpp"

#include <cmath>

#include "caac/errors.hpp"

namespace caac::nn {

AdamState::AdamState(const ParameterSet& params, double lr)
    : learning_rate(lr), first_moment(params), second_moment(params) {}

void adam_step(ParameterSet& params, const Gradients& grads, AdamState& state) {
  if (!grads.matches(params) || !state.first_moment.matches(params) ||
      !state.second_moment.matches(params)) {
    throw ArgumentError("adam_step: gradient or moment shapes do not match parameters");
  }
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(state.beta1, t);
  const double c2 = 1.0 - std::pow(state.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto& p = params[i].value.data;
    const auto& g = grads[i];
    auto& m = state.first_moment[i];
    auto& v = state.second_moment[i];
    for (std::size_t k = 0; k < p.size(); ++k) {
      m[k] = state.beta1 * m[k] + (1.0 - state.beta1) * g[k];
      v[k] = state.beta2 * v[k] + (1.0 - state.beta2) * g[k] * g[k];
      const double m_hat = m[k] / c1;
      const double v_hat = v[k] / c2;
      p[k] -= state.learning_rate * m_hat / (std::sqrt(v_hat) + state.epsilon);
    }
  }
}

}  // namespace caac::nn
