#include <algorithm>
#include <random>

#include <gtest/gtest.h>

#include "caac/errors.hpp"
#include "caac/graph/event_graph.hpp"

using namespace caac::graph;

namespace {

EventNode node(int bus, double t, int stop, double action = 0.0) {
  EventNode n;
  n.bus_index = bus;
  n.time = t;
  n.stop = stop;
  n.action = action;
  return n;
}

std::vector<int> buses(const std::vector<Neighbor>& side) {
  std::vector<int> out;
  for (const auto& n : side) out.push_back(n.node.bus_index);
  return out;
}

}  // namespace

TEST(EventLog, RecordAndOrder) {
  EventLog log(10);
  log.record(node(0, 5.0, 1));
  EXPECT_EQ(log.size(), 1u);
  log.record(node(1, 7.0, 0));
  log.record(node(2, 7.0, 0));
  EXPECT_EQ(log.nodes()[1].bus_index, 1);
  EXPECT_EQ(log.nodes()[2].bus_index, 2);
  EXPECT_THROW(log.record(node(3, 6.0, 0)), caac::ProtocolError);
}

TEST(EventLog, EmptyWindowAndEmptyLog) {
  EventLog log(10);
  EXPECT_TRUE(log.neighbor_sets(2, 3, 100, 130).empty());
  log.record(node(2, 100, 3));
  log.record(node(2, 130, 4));
  EXPECT_TRUE(log.neighbor_sets(2, 3, 100, 130).empty());  // own bus only
}

TEST(EventLog, UpstreamAndDownstreamSplit) {
  EventLog log(20);
  log.record(node(4, 100, 6));
  log.record(node(3, 110, 8));
  log.record(node(6, 120, 4));
  const auto sets = log.neighbor_sets(4, 6, 100, 130);
  EXPECT_EQ(buses(sets.downstream), std::vector<int>{3});
  EXPECT_EQ(buses(sets.upstream), std::vector<int>{6});
  EXPECT_DOUBLE_EQ(sets.upstream[0].edge.bus_gap, 2.0);
  EXPECT_DOUBLE_EQ(sets.downstream[0].edge.stop_gap, 2.0 / 20.0);
}

TEST(EventLog, WindowIsOpenOnTheLeftClosedOnTheRight) {
  EventLog log(20);
  log.record(node(1, 100, 2));  // at t: excluded
  log.record(node(0, 100, 5));  // at t: excluded
  log.record(node(3, 130, 1));  // at t_next: included
  log.record(node(4, 130.5, 1));
  const auto sets = log.neighbor_sets(1, 2, 100, 130);
  EXPECT_TRUE(sets.downstream.empty());
  EXPECT_EQ(buses(sets.upstream), std::vector<int>{3});
  EXPECT_THROW(log.neighbor_sets(1, 2, 130, 130), caac::ArgumentError);
}

TEST(EdgeFeatures, Definitions) {
  EXPECT_EQ(edge_features(node(1, 0, 5), node(2, 0, 5), 46).stop_gap, 0.0);
  EXPECT_NEAR(edge_features(node(1, 0, 10), node(2, 0, 14), 46).stop_gap, 4.0 / 46.0, 1e-15);
  EXPECT_EQ(edge_features(node(3, 0, 10), node(7, 0, 14), 46).bus_gap, 4.0);
}

TEST(EventLog, IndexedQueryEqualsOracle) {
  std::mt19937_64 rng(31);
  std::uniform_int_distribution<int> bus(0, 11);
  std::uniform_int_distribution<int> stop(0, 29);
  std::exponential_distribution<double> gap(1.0 / 20.0);
  std::bernoulli_distribution tie(0.15);
  for (int trial = 0; trial < 1000; ++trial) {
    EventLog log(30);
    double t = 0.0;
    const int n = 5 + trial % 60;
    for (int k = 0; k < n; ++k) {
      if (!tie(rng)) t += gap(rng);
      log.record(node(bus(rng), t, stop(rng), 0.01 * k));
    }
    for (int q = 0; q < 5; ++q) {
      const auto& ego = log.nodes()[static_cast<std::size_t>(std::uniform_int_distribution<int>(0, n - 1)(rng))];
      const double t_next = ego.time + 1.0 + gap(rng) * 3.0;
      const auto fast = log.neighbor_sets(ego.bus_index, ego.stop, ego.time, t_next);
      const auto slow = log.oracle_neighbor_sets(ego.bus_index, ego.stop, ego.time, t_next);
      ASSERT_EQ(fast, slow) << "trial " << trial;
    }
  }
}
