#pragma once

#include <functional>
#include <string>
#include <vector>

#include "caac/nn/params.hpp"
#include "caac/nn/tape.hpp"

namespace caac::nn {

struct GradCheckOptions {
  double step = 1e-5;
  double tolerance = 1e-4;
  // Relative error is |analytic - numeric| / max(|analytic|, |numeric|, floor).
  double relative_floor = 1e-6;
};

struct GradCheckReport {
  double max_relative_error = 0.0;
  std::size_t coordinates = 0;
  std::string worst_parameter;
  std::size_t worst_index = 0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
  bool passed = true;
};

/// Builds a scalar on the given tape from the current parameter values.
using ScalarForward = std::function<Var(Tape&)>;

/// Compares reverse-mode gradients against central finite differences for
/// every coordinate of every set in `params`. The sets are perturbed in place
/// and restored.
GradCheckReport gradient_check(const ScalarForward& forward,
                               const std::vector<ParameterSet*>& params,
                               const GradCheckOptions& options = {});

}  // namespace caac::nn
