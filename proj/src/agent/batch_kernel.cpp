#include "caac/agent/batch_kernel.hpp"

#include <omp.h>

namespace caac::agent {

BatchKernel::BatchKernel(std::vector<const nn::ParameterSet*> sets) : sets_(std::move(sets)) {}

void BatchKernel::sample(nn::Tape& tape, std::size_t i, const SampleLoss& loss) {
  tape.clear();
  const nn::Var root = loss(tape, i);
  tape.backward(root);
  losses_[i] = tape.scalar(root);
  for (std::size_t s = 0; s < sets_.size(); ++s) {
    per_sample_[i][s].zero();
    tape.collect(*sets_[s], per_sample_[i][s]);
  }
}

double BatchKernel::run(std::size_t n, const SampleLoss& loss, std::vector<nn::Gradients>& out,
                        bool parallel) {
  while (per_sample_.size() < n) {
    std::vector<nn::Gradients> g;
    for (const auto* set : sets_) g.emplace_back(*set);
    per_sample_.push_back(std::move(g));
  }
  losses_.assign(n, 0.0);
  const auto threads = static_cast<std::size_t>(parallel ? omp_get_max_threads() : 1);
  if (tapes_.size() < threads) tapes_.resize(threads);

  if (parallel) {
    const auto count = static_cast<long>(n);
#pragma omp parallel for schedule(dynamic)
    for (long i = 0; i < count; ++i) {
      sample(tapes_[static_cast<std::size_t>(omp_get_thread_num())], static_cast<std::size_t>(i),
             loss);
    }
  } else {
    for (std::size_t i = 0; i < n; ++i) sample(tapes_[0], i, loss);
  }

  out.clear();
  for (const auto* set : sets_) out.emplace_back(*set);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    total += losses_[i];
    for (std::size_t s = 0; s < sets_.size(); ++s) out[s].add(per_sample_[i][s]);
  }
  const double inv = 1.0 / static_cast<double>(n);
  for (auto& g : out) g.scale(inv);
  return total * inv;
}

}  // namespace caac::agent
