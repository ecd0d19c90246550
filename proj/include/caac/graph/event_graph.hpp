#pragma once

#include <cstddef>
#include <vector>

#include "caac/env/observation.hpp"

namespace caac::graph {

/// One bus arrival: the vertex of the event graph.
struct EventNode {
  int bus_index = 0;
  double time = 0.0;
  int stop = 0;
  env::Observation obs;
  double action = 0.0;  // 0 where no holding decision was taken

  bool operator==(const EventNode&) const = default;
};

struct EdgeFeature {
  double stop_gap = 0.0;  // |stop difference| / n_stops
  double bus_gap = 0.0;   // |j - i|

  bool operator==(const EdgeFeature&) const = default;
};

struct Neighbor {
  EventNode node;
  EdgeFeature edge;

  bool operator==(const Neighbor&) const = default;
};

/// Other buses' arrivals inside (t, t_next]. Upstream buses follow the ego bus
/// (larger index), downstream buses lead it.
struct NeighborSets {
  std::vector<Neighbor> upstream;
  std::vector<Neighbor> downstream;
  double window_begin = 0.0;
  double window_end = 0.0;

  bool empty() const { return upstream.empty() && downstream.empty(); }
  bool operator==(const NeighborSets&) const = default;
};

EdgeFeature edge_features(const EventNode& ego, const EventNode& other, int n_stops);

/// Chronological, append-only record of arrivals.
class EventLog {
 public:
  explicit EventLog(int n_stops = 1);

  /// Throws ProtocolError if `node` is earlier than the last recorded node.
  void record(const EventNode& node);

  /// Indexed query (binary search on time). Throws ArgumentError unless t < t_next.
  NeighborSets neighbor_sets(int ego_bus, int ego_stop, double t, double t_next) const;
  /// Linear scan over the whole log; the reference the indexed query is tested against.
  NeighborSets oracle_neighbor_sets(int ego_bus, int ego_stop, double t, double t_next) const;

  const std::vector<EventNode>& nodes() const { return nodes_; }
  std::size_t size() const { return nodes_.size(); }
  int n_stops() const { return n_stops_; }

 private:
  void classify(const EventNode& ego, const EventNode& other, NeighborSets& out) const;

  int n_stops_;
  std::vector<EventNode> nodes_;
};

}  // namespace caac::graph
