#include "caac/metrics/metrics.hpp"

#include <algorithm>
#include <limits>
#include <string>

#include "caac/errors.hpp"

namespace caac::metrics {

double cv2(std::span<const double> headways) {
  if (headways.size() < 2) throw DataError("cv2: needs at least two headways");
  double mean = 0.0;
  for (double h : headways) {
    if (!(h >= 0.0)) throw ArgumentError("cv2: headways must be >= 0");
    mean += h;
  }
  mean /= static_cast<double>(headways.size());
  if (mean == 0.0) throw DataError("cv2: mean headway is zero");
  double var = 0.0;
  for (double h : headways) var += (h - mean) * (h - mean);
  var /= static_cast<double>(headways.size());
  return var / (mean * mean);
}

double EpisodeMetrics::downstream_cv2() const {
  const std::size_t n = cv2_by_stop.size();
  if (n == 0) return 0.0;
  const std::size_t first = (2 * n) / 3;
  double total = 0.0;
  for (std::size_t k = first; k < n; ++k) total += cv2_by_stop[k];
  return total / static_cast<double>(n - first);
}

namespace {

double mean_of(double total, std::size_t count) {
  return count == 0 ? 0.0 : total / static_cast<double>(count);
}

double dispersion(std::span<const double> xs) {
  if (xs.empty()) return 0.0;
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  if (mean == 0.0) return 0.0;
  double var = 0.0;
  for (double x : xs) var += (x - mean) * (x - mean);
  var /= static_cast<double>(xs.size());
  return var / mean;
}

// Arrival times indexed [stop][bus], negative where the bus never arrived.
std::vector<std::vector<double>> arrival_table(std::span<const sim::ArrivalEvent> events,
                                               int n_stops, int n_buses) {
  std::vector<std::vector<double>> t(static_cast<std::size_t>(n_stops),
                                     std::vector<double>(static_cast<std::size_t>(n_buses), -1.0));
  for (const auto& e : events) {
    if (e.stop < 0 || e.stop >= n_stops || e.bus_index < 0 || e.bus_index >= n_buses) {
      throw DataError("event log names bus " + std::to_string(e.bus_index) + " at stop " +
                      std::to_string(e.stop) + ", outside the route");
    }
    t[static_cast<std::size_t>(e.stop)][static_cast<std::size_t>(e.bus_index)] = e.time;
  }
  return t;
}

std::vector<double> stop_headways(const std::vector<double>& times) {
  std::vector<double> h;
  for (std::size_t i = 1; i < times.size(); ++i) {
    if (times[i] >= 0.0 && times[i - 1] >= 0.0) h.push_back(times[i] - times[i - 1]);
  }
  return h;
}

struct ServiceWindow {
  std::vector<double> first;  // first arrival per stop
  std::vector<double> last;   // last departure per stop, negative if none
};

ServiceWindow service_windows(std::span<const sim::ArrivalEvent> events, int n_stops) {
  const auto n = static_cast<std::size_t>(n_stops);
  ServiceWindow w{std::vector<double>(n, std::numeric_limits<double>::infinity()),
                  std::vector<double>(n, -1.0)};
  for (const auto& e : events) {
    const auto k = static_cast<std::size_t>(e.stop);
    w.first[k] = std::min(w.first[k], e.time);
    if (e.departure_time && !e.final_stop) w.last[k] = std::max(w.last[k], *e.departure_time);
  }
  return w;
}

struct WaitTally {
  std::vector<double> total;
  std::vector<std::size_t> count;
};

WaitTally tally_waits(std::span<const sim::Passenger> passengers,
                      std::span<const sim::ArrivalEvent> events, const sim::RouteConfig& config) {
  const int n = config.n_stops();
  const auto window = service_windows(events, n);
  WaitTally w{std::vector<double>(static_cast<std::size_t>(n), 0.0),
              std::vector<std::size_t>(static_cast<std::size_t>(n), 0)};
  for (const auto& p : passengers) {
    if (p.origin < 0 || p.origin >= n) throw DataError("passenger origin outside the route");
    const auto o = static_cast<std::size_t>(p.origin);
    if (p.arrive_time < window.first[o]) continue;
    if (p.board_time) {
      w.total[o] += *p.board_time - p.arrive_time;
      ++w.count[o];
    } else if (window.last[o] >= 0.0 && p.arrive_time <= window.last[o]) {
      w.total[o] += config.horizon - p.arrive_time;
      ++w.count[o];
    }
  }
  return w;
}

}  // namespace

EpisodeMetrics compute_metrics(std::span<const sim::ArrivalEvent> events,
                               std::span<const sim::Passenger> passengers,
                               std::span<const env::Decision> decisions,
                               const sim::RouteConfig& config) {
  const int n_stops = config.n_stops();
  EpisodeMetrics m;

  double holds = 0.0;
  for (const auto& d : decisions) {
    if (d.hold < 0.0) throw DataError("decision trace has a negative hold");
    holds += d.hold;
  }
  m.aht = mean_of(holds, decisions.size());

  long boarded_events = 0;
  long alighted_events = 0;
  std::vector<double> occupancy;
  for (const auto& e : events) {
    boarded_events += e.n_boarded;
    alighted_events += e.n_alighted;
    if (e.occupancy < 0 || e.occupancy > config.capacity) {
      throw DataError("event log occupancy outside [0, capacity]");
    }
    if (!e.final_stop && e.departure_time) occupancy.push_back(e.occupancy);
  }
  m.aod = dispersion(occupancy);

  long boarded = 0;
  long alighted = 0;
  double ride = 0.0;
  for (const auto& p : passengers) {
    if (p.board_time) {
      ++boarded;
      if (*p.board_time < p.arrive_time) throw DataError("passenger boarded before arriving");
    }
    if (p.alight_time) {
      if (!p.board_time) throw DataError("passenger alighted without boarding");
      if (*p.alight_time < *p.board_time) throw DataError("passenger alighted before boarding");
      ++alighted;
      ride += *p.alight_time - *p.board_time;
    }
  }
  if (boarded != boarded_events) {
    throw DataError("passenger log has " + std::to_string(boarded) +
                    " boardings, event log has " + std::to_string(boarded_events));
  }
  if (alighted != alighted_events) {
    throw DataError("passenger log has " + std::to_string(alighted) +
                    " alightings, event log has " + std::to_string(alighted_events));
  }
  m.ajt = mean_of(ride, static_cast<std::size_t>(alighted));

  const auto waits = tally_waits(passengers, events, config);
  double wait_total = 0.0;
  std::size_t wait_count = 0;
  for (std::size_t k = 0; k < waits.total.size(); ++k) {
    wait_total += waits.total[k];
    wait_count += waits.count[k];
  }
  m.awt = mean_of(wait_total, wait_count);

  const auto table = arrival_table(events, n_stops, config.n_services);
  double trips = 0.0;
  std::size_t trip_count = 0;
  for (std::size_t i = 0; i < static_cast<std::size_t>(config.n_services); ++i) {
    const double start = table.front()[i];
    const double end = table.back()[i];
    if (start >= 0.0 && end >= 0.0) {
      trips += end - start;
      ++trip_count;
    }
  }
  m.att = mean_of(trips, trip_count);

  for (const auto& times : table) {
    auto h = stop_headways(times);
    double c = 0.0;
    if (h.size() >= 2) {
      double mean = 0.0;
      for (double x : h) mean += x;
      if (mean > 0.0) c = cv2(h);
    }
    m.cv2_by_stop.push_back(c);
    m.headway_samples.push_back(std::move(h));
  }
  return m;
}

StopwiseSeries stopwise_series(std::span<const sim::ArrivalEvent> events,
                               std::span<const sim::Passenger> passengers,
                               const std::vector<sim::ArrivalEvent>* reference,
                               const sim::RouteConfig& config) {
  if (reference == nullptr) {
    throw StateError("stopwise_series: an NC reference run on the same seed is required");
  }
  const int n = config.n_stops();
  const auto ns = static_cast<std::size_t>(n);
  StopwiseSeries s;
  const auto waits = tally_waits(passengers, events, config);
  s.awt.resize(ns);
  for (std::size_t k = 0; k < ns; ++k) s.awt[k] = mean_of(waits.total[k], waits.count[k]);

  std::vector<std::vector<double>> occ(ns);
  for (const auto& e : events) {
    if (!e.final_stop && e.departure_time) occ[static_cast<std::size_t>(e.stop)].push_back(e.occupancy);
  }
  s.aod.resize(ns);
  for (std::size_t k = 0; k < ns; ++k) s.aod[k] = dispersion(occ[k]);

  const auto run = arrival_table(events, n, config.n_services);
  const auto ref = arrival_table(*reference, n, config.n_services);
  s.added_travel_time.assign(ns, 0.0);
  for (std::size_t k = 0; k < ns; ++k) {
    double total = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < static_cast<std::size_t>(config.n_services); ++i) {
      if (run[k][i] < 0.0 || ref[k][i] < 0.0 || run[0][i] < 0.0 || ref[0][i] < 0.0) continue;
      total += (run[k][i] - run[0][i]) - (ref[k][i] - ref[0][i]);
      ++count;
    }
    s.added_travel_time[k] = mean_of(total, count);
  }
  return s;
}

double min_pairwise_headway(std::span<const sim::ArrivalEvent> events, int n_stops) {
  int n_buses = 0;
  for (const auto& e : events) n_buses = std::max(n_buses, e.bus_index + 1);
  const auto table = arrival_table(events, n_stops, n_buses);
  double best = std::numeric_limits<double>::infinity();
  for (const auto& times : table) {
    for (double h : stop_headways(times)) best = std::min(best, h);
  }
  return best;
}

}  // namespace caac::metrics
