#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "caac/sim/route.hpp"

namespace caac::sim {

struct Passenger {
  int origin = 0;
  int destination = 0;
  double arrive_time = 0.0;
  std::optional<double> board_time;
  std::optional<double> alight_time;

  bool operator==(const Passenger&) const = default;
};

enum class BusPhase { pending, cruising, at_stop, finished };

struct BusState {
  int bus_index = 0;
  BusPhase phase = BusPhase::pending;
  double position = 0.0;  // meters; refreshed at every processed event
  int next_stop = 0;      // stop the bus is at, or heading to
  int occupancy = 0;
  std::vector<std::uint32_t> onboard;  // indices into Simulation::passengers()
  double dispatch_time = 0.0;

  double leg_departure = 0.0;  // left the previous stop (cruising)
  double leg_arrival = 0.0;    // reaches next_stop (cruising / pending)
  std::optional<double> departure_time;  // at_stop, once the hold is applied
  std::size_t current_event = 0;         // event_log index of the current stop visit

  bool active() const { return phase == BusPhase::cruising || phase == BusPhase::at_stop; }
  bool operator==(const BusState&) const = default;
};

struct ArrivalEvent {
  int bus_index = 0;
  int stop = 0;
  double time = 0.0;
  int n_alighted = 0;
  int n_boarded = 0;  // includes passengers who boarded during the dwell/hold slack
  std::optional<double> departure_time;
  double dwell = 0.0;
  double hold = 0.0;
  int occupancy = 0;  // onboard when the bus leaves the stop
  bool final_stop = false;
  std::optional<double> next_arrival;  // scheduled arrival at the next stop, set on departure

  bool operator==(const ArrivalEvent&) const = default;
};

struct Headways {
  double forward = 0.0;   // s, time to reach the leader's current position
  double backward = 0.0;  // s, the follower's forward headway
};

struct PassengerAudit {
  std::size_t generated = 0;
  std::size_t not_arrived = 0;
  std::size_t waiting = 0;
  std::size_t onboard = 0;       // from passenger records
  std::size_t onboard_buses = 0;  // sum of bus occupancies
  std::size_t alighted = 0;

  bool conserved() const {
    return generated == not_arrived + waiting + onboard + alighted && onboard == onboard_buses;
  }
};

struct SimOptions {
  /// Test hook: every link uses this speed factor instead of a U(0.6, 1.2) draw.
  std::optional<double> pinned_speed_factor;

  bool operator==(const SimOptions&) const = default;
};

// Free-standing pieces of the simulator, exposed for direct testing.

/// times[0] = 0; gaps ~ Normal(mean, std) floored at 60 s.
std::vector<double> dispatch_times(int n, double mean, double stdev, std::mt19937_64& rng);

/// Per-stop arrival lists (sorted by time), counts ~ Poisson(rate * horizon).
std::vector<std::vector<Passenger>> generate_passengers(const DemandProfile& demand,
                                                        double horizon, std::mt19937_64& rng);

/// Sum rule: t_alight * n_alight + t_board * n_board.
double dwell_time(int n_alight, int n_board, double t_alight = 1.8, double t_board = 3.0);

/// U(0.6, 1.2) speed multiplier.
double draw_speed_factor(std::mt19937_64& rng);
double link_travel_time(double distance_m, double speed_kmh, double speed_factor);
double link_travel_time(double distance_m, double speed_kmh, std::mt19937_64& rng);

inline constexpr double kMinDispatchGap = 60.0;

/// Deterministic discrete-event simulation of one route.
///
/// All randomness (dispatch gaps, passenger arrivals, one speed factor per
/// bus per link) is drawn in `build`, so two policies run on the same seed
/// face identical road conditions and demand.
///
/// Protocol: `advance_to_next_arrival` returns the next arrival; unless it is
/// the final stop, `apply_holding` must be called before advancing again.
/// Simultaneous events resolve departures first, then lower bus index first.
class Simulation {
 public:
  static Simulation build(RouteConfig config, DemandProfile demand, std::uint64_t seed,
                          SimOptions options = {});

  /// Next arrival, or nullopt once every bus has finished or the next event lies past the horizon.
  std::optional<ArrivalEvent> advance_to_next_arrival();
  void apply_holding(const ArrivalEvent& event, double hold);

  /// Requires the bus to be active or to have finished at the current clock.
  Headways headways(int bus_index) const;
  double position(int bus_index) const;
  /// Forward headways of all active buses at the current clock, in bus order.
  std::vector<double> active_forward_headways() const;

  double clock() const { return clock_; }
  bool decision_pending() const { return pending_.has_value(); }
  bool done() const { return done_; }
  const RouteConfig& config() const { return config_; }
  const DemandProfile& demand() const { return demand_; }
  const std::vector<BusState>& buses() const { return buses_; }
  const std::vector<ArrivalEvent>& event_log() const { return events_; }
  const std::vector<Passenger>& passengers() const { return passengers_; }
  const std::vector<double>& dispatch_schedule() const { return dispatch_; }
  std::size_t waiting_at(int stop) const;
  PassengerAudit audit() const;

  bool operator==(const Simulation&) const = default;

 private:
  Simulation() = default;

  void process_departure(BusState& bus);
  ArrivalEvent process_arrival(BusState& bus);
  int board_until(BusState& bus, int stop, double time, bool boarding_during_slack);
  double speed_factor(int bus, int link) const;

  RouteConfig config_;
  DemandProfile demand_;
  SimOptions options_;
  std::mt19937_64 rng_;
  double clock_ = 0.0;
  bool done_ = false;
  std::vector<BusState> buses_;
  std::vector<double> dispatch_;
  std::vector<double> speed_factors_;  // [bus * (n_stops - 1) + link]
  std::vector<Passenger> passengers_;  // grouped by origin, sorted by time within a stop
  std::vector<std::size_t> stop_begin_;
  std::vector<std::size_t> stop_end_;
  std::vector<std::size_t> board_cursor_;  // boarding is FIFO, so boarded = a prefix per stop
  std::vector<double> arrivals_;           // [bus * n_stops + stop], negative until known
  std::vector<double> departures_;
  std::vector<ArrivalEvent> events_;
  std::optional<std::size_t> pending_;  // bus awaiting a holding decision
};

}  // namespace caac::sim
