#include <benchmark/benchmark.h>

#include <random>

#include "caac/agent/agent.hpp"
#include "caac/agent/replay.hpp"
#include "caac/graph/event_graph.hpp"
#include "caac/sim/route.hpp"

using namespace caac;

namespace {

const agent::ReplayBuffer& desk_buffer() {
  static const agent::ReplayBuffer buffer = [] {
    const auto r = sim::preset_route("desk");
    agent::ReplayBuffer out(100000);
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
      env::HoldingEnv e(sim::Simulation::build(r.config, r.demand, seed));
      agent::TransitionAssembler assembler;
      std::mt19937_64 rng(seed);
      std::uniform_real_distribution<double> u(0.0, 0.6);
      while (e.next()) {
        e.act(u(rng));
        assembler.poll(e, out);
      }
      assembler.flush(e, out);
    }
    return out;
  }();
  return buffer;
}

// Critic and event-critic gradients over one minibatch; range(0) = batch size, range(1) = parallel.
void BM_CriticBatch(benchmark::State& state) {
  const auto& buffer = desk_buffer();
  agent::CaacAgent learner(agent::CaacConfig{}, agent::EventCriticMode::enabled, 1);
  learner.set_parallel(state.range(1) != 0);
  std::mt19937_64 rng(2);
  const auto batch = buffer.sample(static_cast<std::size_t>(state.range(0)), rng);
  nn::Gradients critic;
  nn::Gradients event;
  for (auto _ : state) {
    benchmark::DoNotOptimize(learner.critic_gradients(batch, critic, event));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_CriticBatch)->ArgsProduct({{64, 256}, {0, 1}})->Unit(benchmark::kMicrosecond);

graph::EventLog random_log(std::size_t n, int buses, int stops) {
  graph::EventLog log(stops);
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> bus(0, buses - 1);
  std::uniform_int_distribution<int> stop(0, stops - 1);
  std::exponential_distribution<double> gap(1.0 / 20.0);
  double t = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    t += gap(rng);
    graph::EventNode node;
    node.bus_index = bus(rng);
    node.stop = stop(rng);
    node.time = t;
    log.record(node);
  }
  return log;
}

template <bool Indexed>
void BM_NeighborQuery(benchmark::State& state) {
  const auto log = random_log(static_cast<std::size_t>(state.range(0)), 30, 40);
  const double end = log.nodes().back().time;
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> at(0.0, end - 600.0);
  for (auto _ : state) {
    const double t = at(rng);
    if constexpr (Indexed) {
      benchmark::DoNotOptimize(log.neighbor_sets(4, 10, t, t + 420.0));
    } else {
      benchmark::DoNotOptimize(log.oracle_neighbor_sets(4, 10, t, t + 420.0));
    }
  }
}
BENCHMARK(BM_NeighborQuery<true>)->Arg(1000)->Arg(20000);
BENCHMARK(BM_NeighborQuery<false>)->Arg(1000)->Arg(20000);

}  // namespace

BENCHMARK_MAIN();
