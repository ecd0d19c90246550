#include "caac/nn/gradcheck.hpp"

#include <algorithm>
#include <cmath>

namespace caac::nn {

GradCheckReport gradient_check(const ScalarForward& forward,
                               const std::vector<ParameterSet*>& params,
                               const GradCheckOptions& options) {
  Tape tape;
  Var root = forward(tape);
  tape.backward(root);
  std::vector<Gradients> analytic;
  analytic.reserve(params.size());
  for (ParameterSet* set : params) {
    analytic.emplace_back(*set);
    tape.collect(*set, analytic.back());
  }

  auto evaluate = [&]() {
    Tape scratch;
    return scratch.scalar(forward(scratch));
  };

  GradCheckReport report;
  for (std::size_t s = 0; s < params.size(); ++s) {
    ParameterSet& set = *params[s];
    for (std::size_t p = 0; p < set.size(); ++p) {
      auto& data = set[p].value.data;
      for (std::size_t k = 0; k < data.size(); ++k) {
        const double original = data[k];
        data[k] = original + options.step;
        const double up = evaluate();
        data[k] = original - options.step;
        const double down = evaluate();
        data[k] = original;

        const double numeric = (up - down) / (2.0 * options.step);
        const double a = analytic[s][p][k];
        const double denom = std::max({std::abs(a), std::abs(numeric), options.relative_floor});
        const double rel = std::abs(a - numeric) / denom;
        ++report.coordinates;
        if (report.coordinates == 1 || rel > report.max_relative_error) {
          report.max_relative_error = rel;
          report.worst_parameter = set[p].name;
          report.worst_index = k;
          report.worst_analytic = a;
          report.worst_numeric = numeric;
        }
      }
    }
  }
  report.passed = report.max_relative_error < options.tolerance;
  return report;
}

}  // namespace caac::nn
