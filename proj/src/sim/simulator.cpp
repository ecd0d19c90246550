#include "caac/sim/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "caac/errors.hpp"

namespace caac::sim {

namespace {

std::mt19937_64 stream(std::uint64_t seed, std::uint32_t tag) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed & 0xffffffffu),
                    static_cast<std::uint32_t>(seed >> 32), tag};
  return std::mt19937_64(seq);
}

constexpr std::uint32_t kDispatchStream = 1;
constexpr std::uint32_t kDemandStream = 2;
constexpr std::uint32_t kSpeedStream = 3;

}  // namespace

std::vector<double> dispatch_times(int n, double mean, double stdev, std::mt19937_64& rng) {
  if (n < 1) throw ArgumentError("dispatch_times: n must be at least 1");
  std::vector<double> times(static_cast<std::size_t>(n), 0.0);
  std::normal_distribution<double> gap(mean, stdev);
  for (std::size_t i = 1; i < times.size(); ++i) {
    const double g = stdev > 0.0 ? gap(rng) : mean;
    times[i] = times[i - 1] + std::max(kMinDispatchGap, g);
  }
  return times;
}

std::vector<std::vector<Passenger>> generate_passengers(const DemandProfile& demand,
                                                        double horizon, std::mt19937_64& rng) {
  if (!(horizon > 0.0)) throw ArgumentError("generate_passengers: horizon must be > 0");
  const std::size_t n = demand.boarding_rate.size();
  std::vector<std::vector<Passenger>> queues(n);
  std::uniform_real_distribution<double> when(0.0, horizon);
  for (std::size_t o = 0; o < n; ++o) {
    const double rate = demand.boarding_rate[o];
    if (rate <= 0.0 || o + 1 >= n) continue;
    std::poisson_distribution<long> count(rate * horizon);
    const long k = count(rng);
    std::vector<double> times(static_cast<std::size_t>(k));
    for (auto& t : times) t = when(rng);
    std::sort(times.begin(), times.end());
    const auto& row = demand.alight_weights[o];
    std::discrete_distribution<int> dest(row.begin() + static_cast<std::ptrdiff_t>(o) + 1,
                                         row.end());
    auto& q = queues[o];
    q.reserve(times.size());
    for (double t : times) {
      Passenger p;
      p.origin = static_cast<int>(o);
      p.destination = static_cast<int>(o) + 1 + dest(rng);
      p.arrive_time = t;
      q.push_back(p);
    }
  }
  return queues;
}

double dwell_time(int n_alight, int n_board, double t_alight, double t_board) {
  if (n_alight < 0 || n_board < 0) throw ArgumentError("dwell_time: counts must be >= 0");
  return t_alight * n_alight + t_board * n_board;
}

double draw_speed_factor(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.6, 1.2);
  return u(rng);
}

double link_travel_time(double distance_m, double speed_kmh, double speed_factor) {
  if (!(distance_m > 0.0)) throw ArgumentError("link_travel_time: distance must be > 0");
  return distance_m / (speed_kmh * speed_factor / 3.6);
}

double link_travel_time(double distance_m, double speed_kmh, std::mt19937_64& rng) {
  return link_travel_time(distance_m, speed_kmh, draw_speed_factor(rng));
}

Simulation Simulation::build(RouteConfig config, DemandProfile demand, std::uint64_t seed,
                             SimOptions options) {
  config.validate();
  demand.validate(config.n_stops());

  Simulation sim;
  sim.rng_ = std::mt19937_64(seed);
  auto dispatch_rng = stream(seed, kDispatchStream);
  auto demand_rng = stream(seed, kDemandStream);
  auto speed_rng = stream(seed, kSpeedStream);

  sim.dispatch_ =
      dispatch_times(config.n_services, config.dispatch_mean, config.dispatch_std, dispatch_rng);

  auto queues = generate_passengers(demand, config.horizon, demand_rng);
  const auto n_stops = static_cast<std::size_t>(config.n_stops());
  sim.stop_begin_.resize(n_stops);
  sim.stop_end_.resize(n_stops);
  for (std::size_t k = 0; k < n_stops; ++k) {
    sim.stop_begin_[k] = sim.passengers_.size();
    sim.passengers_.insert(sim.passengers_.end(), queues[k].begin(), queues[k].end());
    sim.stop_end_[k] = sim.passengers_.size();
  }
  sim.board_cursor_ = sim.stop_begin_;

  const auto n_links = n_stops - 1;
  const auto n_buses = static_cast<std::size_t>(config.n_services);
  sim.speed_factors_.resize(n_buses * n_links);
  for (auto& f : sim.speed_factors_) {
    f = options.pinned_speed_factor ? *options.pinned_speed_factor : draw_speed_factor(speed_rng);
  }

  sim.buses_.resize(n_buses);
  for (std::size_t i = 0; i < n_buses; ++i) {
    BusState& b = sim.buses_[i];
    b.bus_index = static_cast<int>(i);
    b.dispatch_time = sim.dispatch_[i];
    b.leg_arrival = sim.dispatch_[i];
  }
  sim.arrivals_.assign(n_buses * n_stops, -1.0);
  sim.departures_.assign(n_buses * n_stops, -1.0);
  sim.config_ = std::move(config);
  sim.demand_ = std::move(demand);
  sim.options_ = options;
  return sim;
}

double Simulation::speed_factor(int bus, int link) const {
  const auto n_links = static_cast<std::size_t>(config_.n_stops() - 1);
  return speed_factors_[static_cast<std::size_t>(bus) * n_links + static_cast<std::size_t>(link)];
}

std::optional<ArrivalEvent> Simulation::advance_to_next_arrival() {
  if (pending_) {
    throw ProtocolError("advance_to_next_arrival: holding decision for bus " +
                        std::to_string(*pending_) + " has not been applied");
  }
  while (!done_) {
    int best = -1;
    double best_time = std::numeric_limits<double>::infinity();
    int best_kind = 2;  // 0 = departure, 1 = arrival
    for (const BusState& b : buses_) {
      double t = 0.0;
      int kind = 1;
      switch (b.phase) {
        case BusPhase::pending:
        case BusPhase::cruising:
          t = b.leg_arrival;
          break;
        case BusPhase::at_stop:
          t = *b.departure_time;
          kind = 0;
          break;
        case BusPhase::finished:
          continue;
      }
      if (t < best_time || (t == best_time && kind < best_kind)) {
        best = b.bus_index;
        best_time = t;
        best_kind = kind;
      }
    }
    if (best < 0 || best_time > config_.horizon) {
      done_ = true;
      break;
    }
    clock_ = best_time;
    BusState& bus = buses_[static_cast<std::size_t>(best)];
    if (best_kind == 0) {
      process_departure(bus);
      continue;
    }
    return process_arrival(bus);
  }
  return std::nullopt;
}

int Simulation::board_until(BusState& bus, int stop, double time, bool during_slack) {
  const auto k = static_cast<std::size_t>(stop);
  const double bus_arrival = arrivals_[static_cast<std::size_t>(bus.bus_index) *
                                           static_cast<std::size_t>(config_.n_stops()) +
                                       k];
  int boarded = 0;
  std::size_t& cursor = board_cursor_[k];
  while (cursor < stop_end_[k] && passengers_[cursor].arrive_time <= time &&
         bus.occupancy < config_.capacity) {
    Passenger& p = passengers_[cursor];
    p.board_time = during_slack ? std::max(p.arrive_time, bus_arrival) : time;
    bus.onboard.push_back(static_cast<std::uint32_t>(cursor));
    ++bus.occupancy;
    ++boarded;
    ++cursor;
  }
  return boarded;
}

ArrivalEvent Simulation::process_arrival(BusState& bus) {
  const int stop = bus.next_stop;
  const auto n_stops = static_cast<std::size_t>(config_.n_stops());
  const std::size_t slot = static_cast<std::size_t>(bus.bus_index) * n_stops +
                           static_cast<std::size_t>(stop);
  const double t = clock_;
  arrivals_[slot] = t;
  bus.phase = BusPhase::at_stop;
  bus.position = config_.stop_positions[static_cast<std::size_t>(stop)];
  bus.departure_time.reset();

  int alighted = 0;
  auto keep = std::partition(bus.onboard.begin(), bus.onboard.end(), [&](std::uint32_t id) {
    return passengers_[id].destination != stop;
  });
  for (auto it = keep; it != bus.onboard.end(); ++it) {
    passengers_[*it].alight_time = t;
    ++alighted;
  }
  bus.onboard.erase(keep, bus.onboard.end());
  bus.occupancy -= alighted;

  const bool final_stop = stop + 1 == config_.n_stops();
  const int boarded = final_stop ? 0 : board_until(bus, stop, t, false);

  ArrivalEvent ev;
  ev.bus_index = bus.bus_index;
  ev.stop = stop;
  ev.time = t;
  ev.n_alighted = alighted;
  ev.n_boarded = boarded;
  ev.dwell = dwell_time(alighted, boarded, config_.t_alight, config_.t_board);
  ev.occupancy = bus.occupancy;
  ev.final_stop = final_stop;

  bus.current_event = events_.size();
  if (final_stop) {
    const double depart = t + ev.dwell;
    ev.departure_time = depart;
    departures_[slot] = depart;
    bus.phase = BusPhase::finished;
  } else {
    pending_ = static_cast<std::size_t>(bus.bus_index);
  }
  events_.push_back(ev);
  return ev;
}

void Simulation::apply_holding(const ArrivalEvent& event, double hold) {
  if (!pending_) throw ProtocolError("apply_holding: no holding decision is pending");
  if (static_cast<std::size_t>(event.bus_index) != *pending_) {
    throw ProtocolError("apply_holding: event for bus " + std::to_string(event.bus_index) +
                        " is not the pending decision (bus " + std::to_string(*pending_) + ")");
  }
  if (!(hold >= 0.0) || hold > config_.max_hold) {
    throw ArgumentError("apply_holding: hold " + std::to_string(hold) + " s outside [0, " +
                        std::to_string(config_.max_hold) + "]");
  }
  BusState& bus = buses_[*pending_];
  ArrivalEvent& logged = events_[bus.current_event];
  if (logged.stop != event.stop || logged.time != event.time) {
    throw ProtocolError("apply_holding: event does not match the pending arrival");
  }
  const auto n_stops = static_cast<std::size_t>(config_.n_stops());
  double depart = logged.time + logged.dwell + hold;
  if (bus.bus_index > 0) {
    // A follower cannot leave the stop ahead of its leader.
    const double leader = departures_[static_cast<std::size_t>(bus.bus_index - 1) * n_stops +
                                      static_cast<std::size_t>(event.stop)];
    if (leader > depart) depart = leader;
  }
  bus.departure_time = depart;
  departures_[static_cast<std::size_t>(bus.bus_index) * n_stops +
              static_cast<std::size_t>(event.stop)] = depart;
  logged.departure_time = depart;
  logged.hold = hold;
  pending_.reset();
}

void Simulation::process_departure(BusState& bus) {
  const int stop = bus.next_stop;
  const double depart = *bus.departure_time;
  ArrivalEvent& logged = events_[bus.current_event];
  logged.n_boarded += board_until(bus, stop, depart, true);
  logged.occupancy = bus.occupancy;

  const auto k = static_cast<std::size_t>(stop);
  const double distance = config_.stop_positions[k + 1] - config_.stop_positions[k];
  double arrive =
      depart + link_travel_time(distance, config_.nominal_speed, speed_factor(bus.bus_index, stop));
  if (bus.bus_index > 0) {
    const BusState& leader = buses_[static_cast<std::size_t>(bus.bus_index - 1)];
    const auto n_stops = static_cast<std::size_t>(config_.n_stops());
    double leader_arrival =
        arrivals_[static_cast<std::size_t>(leader.bus_index) * n_stops + k + 1];
    if (leader_arrival < 0.0) leader_arrival = leader.leg_arrival;
    if (leader_arrival > arrive) arrive = leader_arrival;
  }
  logged.next_arrival = arrive;
  bus.phase = BusPhase::cruising;
  bus.leg_departure = depart;
  bus.leg_arrival = arrive;
  bus.next_stop = stop + 1;
  bus.departure_time.reset();
}

double Simulation::position(int bus_index) const {
  const BusState& b = buses_.at(static_cast<std::size_t>(bus_index));
  const auto& x = config_.stop_positions;
  switch (b.phase) {
    case BusPhase::pending:
      return 0.0;
    case BusPhase::at_stop:
      return x[static_cast<std::size_t>(b.next_stop)];
    case BusPhase::finished:
      return x.back();
    case BusPhase::cruising: {
      const auto to = static_cast<std::size_t>(b.next_stop);
      const double span = b.leg_arrival - b.leg_departure;
      const double frac = span > 0.0 ? (clock_ - b.leg_departure) / span : 1.0;
      return x[to - 1] + (x[to] - x[to - 1]) * std::clamp(frac, 0.0, 1.0);
    }
  }
  return 0.0;
}

Headways Simulation::headways(int bus_index) const {
  if (bus_index < 0 || static_cast<std::size_t>(bus_index) >= buses_.size()) {
    throw StateError("headways: no bus " + std::to_string(bus_index));
  }
  const BusState& bus = buses_[static_cast<std::size_t>(bus_index)];
  const bool just_finished =
      bus.phase == BusPhase::finished && events_[bus.current_event].time == clock_;
  if (!bus.active() && !just_finished) throw StateError("headways: bus " + std::to_string(bus_index) + " is not active");
  const double v = config_.speed_mps();
  const double here = position(bus_index);
  Headways h;
  h.forward = config_.dispatch_mean;
  if (bus_index > 0 && buses_[static_cast<std::size_t>(bus_index - 1)].active()) {
    h.forward = (position(bus_index - 1) - here) / v;
  }
  h.backward = config_.dispatch_mean;
  if (static_cast<std::size_t>(bus_index + 1) < buses_.size()) {
    const BusState& follower = buses_[static_cast<std::size_t>(bus_index + 1)];
    if (follower.active()) {
      h.backward = (here - position(bus_index + 1)) / v;
    } else if (follower.phase == BusPhase::pending) {
      h.backward = (follower.dispatch_time - clock_) + here / v;
    }
  }
  return h;
}

std::vector<double> Simulation::active_forward_headways() const {
  std::vector<double> out;
  for (const BusState& b : buses_) {
    if (b.active()) out.push_back(headways(b.bus_index).forward);
  }
  return out;
}

std::size_t Simulation::waiting_at(int stop) const {
  const auto k = static_cast<std::size_t>(stop);
  auto first = passengers_.begin() + static_cast<std::ptrdiff_t>(board_cursor_[k]);
  auto last = passengers_.begin() + static_cast<std::ptrdiff_t>(stop_end_[k]);
  auto upto = std::upper_bound(first, last, clock_, [](double t, const Passenger& p) {
    return t < p.arrive_time;
  });
  return static_cast<std::size_t>(upto - first);
}

PassengerAudit Simulation::audit() const {
  PassengerAudit a;
  a.generated = passengers_.size();
  for (const Passenger& p : passengers_) {
    if (p.alight_time) {
      ++a.alighted;
    } else if (p.board_time) {
      ++a.onboard;
    } else if (p.arrive_time > clock_) {
      ++a.not_arrived;
    } else {
      ++a.waiting;
    }
  }
  for (const BusState& b : buses_) a.onboard_buses += static_cast<std::size_t>(b.occupancy);
  return a;
}

}  // namespace caac::sim
