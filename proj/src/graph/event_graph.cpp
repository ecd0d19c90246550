#include "caac/graph/event_graph.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <string>

#include "caac/errors.hpp"

namespace caac::graph {

EdgeFeature edge_features(const EventNode& ego, const EventNode& other, int n_stops) {
  EdgeFeature e;
  e.stop_gap = static_cast<double>(std::abs(other.stop - ego.stop)) / n_stops;
  e.bus_gap = static_cast<double>(std::abs(other.bus_index - ego.bus_index));
  return e;
}

EventLog::EventLog(int n_stops) : n_stops_(n_stops) {
  if (n_stops < 1) throw ArgumentError("EventLog: n_stops must be >= 1");
}

void EventLog::record(const EventNode& node) {
  if (!nodes_.empty() && node.time < nodes_.back().time) {
    throw ProtocolError("EventLog::record: node at t=" + std::to_string(node.time) +
                        " is earlier than the last recorded t=" +
                        std::to_string(nodes_.back().time));
  }
  nodes_.push_back(node);
}

void EventLog::classify(const EventNode& ego, const EventNode& other, NeighborSets& out) const {
  if (other.bus_index == ego.bus_index) return;
  Neighbor n{other, edge_features(ego, other, n_stops_)};
  if (other.bus_index > ego.bus_index) {
    out.upstream.push_back(n);
  } else {
    out.downstream.push_back(n);
  }
}

NeighborSets EventLog::neighbor_sets(int ego_bus, int ego_stop, double t, double t_next) const {
  if (!(t < t_next)) throw ArgumentError("neighbor_sets: window must satisfy t < t_next");
  NeighborSets out;
  out.window_begin = t;
  out.window_end = t_next;
  EventNode ego;
  ego.bus_index = ego_bus;
  ego.stop = ego_stop;
  ego.time = t;
  auto first = std::upper_bound(nodes_.begin(), nodes_.end(), t,
                                [](double v, const EventNode& n) { return v < n.time; });
  for (auto it = first; it != nodes_.end() && it->time <= t_next; ++it) classify(ego, *it, out);
  return out;
}

NeighborSets EventLog::oracle_neighbor_sets(int ego_bus, int ego_stop, double t,
                                            double t_next) const {
  NeighborSets out;
  out.window_begin = t;
  out.window_end = t_next;
  EventNode ego;
  ego.bus_index = ego_bus;
  ego.stop = ego_stop;
  ego.time = t;
  for (const EventNode& n : nodes_) {
    if (n.time > t && n.time <= t_next) classify(ego, n, out);
  }
  return out;
}

}  // namespace caac::graph
