#pragma once

#include <span>
#include <vector>

#include "caac/env/env.hpp"
#include "caac/sim/simulator.hpp"

namespace caac::metrics {

/// Population Var/mean^2. Throws DataError for fewer than two values or a zero mean.
double cv2(std::span<const double> headways);

struct EpisodeMetrics {
  double aht = 0.0;  // mean commanded hold, s
  double awt = 0.0;  // mean wait at the origin stop, s
  double ajt = 0.0;  // mean in-vehicle time, s
  double att = 0.0;  // mean terminal-to-terminal trip time, s
  double aod = 0.0;  // variance-to-mean ratio of departing occupancy
  std::vector<double> cv2_by_stop;  // arrival-headway CV^2 per stop (0 with < 2 headways)
  std::vector<std::vector<double>> headway_samples;  // per stop, consecutive-bus arrival gaps

  /// Mean of cv2_by_stop over the last third of the stops.
  double downstream_cv2() const;
};

/// Throws DataError when the logs disagree (boarding counts that do not match
/// passenger records, negative waits or rides, unknown buses or stops).
///
/// AWT covers each stop's service window, from the first bus arrival to the
/// last departure. Passengers who never boarded count with wait horizon - arrive
/// when a bus left their stop after they arrived (stranded). Arrivals before
/// the first bus (start-up backlog) or after the last departure are left out.
EpisodeMetrics compute_metrics(std::span<const sim::ArrivalEvent> events,
                               std::span<const sim::Passenger> passengers,
                               std::span<const env::Decision> decisions,
                               const sim::RouteConfig& config);

struct StopwiseSeries {
  std::vector<double> awt;                 // by origin stop
  std::vector<double> aod;                 // by stop, departing occupancy
  std::vector<double> added_travel_time;  // mean (arrival - dispatch) minus the reference's
};

/// Throws StateError when `reference` is null.
StopwiseSeries stopwise_series(std::span<const sim::ArrivalEvent> events,
                               std::span<const sim::Passenger> passengers,
                               const std::vector<sim::ArrivalEvent>* reference,
                               const sim::RouteConfig& config);

/// Smallest arrival gap between consecutive buses at any stop.
double min_pairwise_headway(std::span<const sim::ArrivalEvent> events, int n_stops);

}  // namespace caac::metrics
