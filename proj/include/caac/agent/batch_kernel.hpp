#pragma once

#include <functional>
#include <vector>

#include "caac/nn/params.hpp"
#include "caac/nn/tape.hpp"

namespace caac::agent {

/// Mean loss and mean gradients of a per-sample scalar over a batch.
///
/// Each sample is differentiated on its own tape into its own gradient
/// buffers; the buffers are then summed in sample order. The OpenMP path
/// therefore produces bit-identical results to the serial one.
class BatchKernel {
 public:
  using SampleLoss = std::function<nn::Var(nn::Tape&, std::size_t)>;

  explicit BatchKernel(std::vector<const nn::ParameterSet*> sets);

  /// Fills `out` (one Gradients per set) and returns the mean loss.
  double run(std::size_t n, const SampleLoss& loss, std::vector<nn::Gradients>& out,
             bool parallel);

 private:
  void sample(nn::Tape& tape, std::size_t i, const SampleLoss& loss);

  std::vector<const nn::ParameterSet*> sets_;
  std::vector<nn::Tape> tapes_;
  std::vector<std::vector<nn::Gradients>> per_sample_;
  std::vector<double> losses_;
};

}  // namespace caac::agent
