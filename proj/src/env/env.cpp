#include "caac/env/env.hpp"

#include <algorithm>
#include <string>

#include "caac/errors.hpp"
#include "caac/io/csv.hpp"

namespace caac::env {

void RewardConfig::validate() const {
  if (!(w >= 0.0 && w <= 1.0)) throw ConfigError("reward weight w must lie in [0, 1]");
  if (!(gamma >= 0.0 && gamma < 1.0)) throw ConfigError("gamma must lie in [0, 1)");
}

Observation observe(const sim::Simulation& sim, const sim::ArrivalEvent& event) {
  const auto& config = sim.config();
  const sim::Headways h = sim.headways(event.bus_index);
  const auto& bus = sim.buses()[static_cast<std::size_t>(event.bus_index)];
  Observation obs;
  obs.occupancy = static_cast<double>(bus.occupancy) / config.capacity;
  obs.forward = std::max(0.0, h.forward) / config.dispatch_mean;
  obs.backward = std::max(0.0, h.backward) / config.dispatch_mean;
  return obs;
}

double action_to_hold_seconds(double a, double max_hold) {
  if (!(a >= 0.0 && a <= 1.0)) {
    throw ArgumentError("holding action " + std::to_string(a) + " outside [0, 1]");
  }
  return a * max_hold;
}

double headway_cv2_term(std::span<const double> headways) {
  if (headways.size() < 2) return 0.0;
  double mean = 0.0;
  for (double h : headways) mean += h;
  mean /= static_cast<double>(headways.size());
  if (mean == 0.0) return 0.0;
  double var = 0.0;
  for (double h : headways) var += (h - mean) * (h - mean);
  var /= static_cast<double>(headways.size());
  return var / (mean * mean);
}

double reward_from_headways(std::span<const double> headways, double action, double w) {
  return -(1.0 - w) * headway_cv2_term(headways) - w * action;
}

double compute_reward(const sim::Simulation& sim, const Decision& decision,
                      const RewardConfig& config) {
  const auto h = sim.active_forward_headways();
  return reward_from_headways(h, decision.action, config.w);
}

std::vector<double> forward_headways_from_log(std::span<const sim::ArrivalEvent> log,
                                              const sim::RouteConfig& config, std::size_t index) {
  if (index >= log.size()) throw ArgumentError("forward_headways_from_log: index out of range");
  const double t = log[index].time;
  const auto& x = config.stop_positions;
  std::vector<const sim::ArrivalEvent*> latest(static_cast<std::size_t>(config.n_services), nullptr);
  for (std::size_t k = 0; k <= index; ++k) {
    const auto bus = static_cast<std::size_t>(log[k].bus_index);
    if (bus >= latest.size()) throw DataError("event log names bus outside the fleet");
    latest[bus] = &log[k];
  }
  std::vector<std::optional<double>> pos(latest.size());
  for (std::size_t j = 0; j < latest.size(); ++j) {
    const sim::ArrivalEvent* e = latest[j];
    if (e == nullptr || e->final_stop) continue;
    const auto k = static_cast<std::size_t>(e->stop);
    const bool left = e != &log[index] && e->departure_time && *e->departure_time <= t;
    if (!left) {
      pos[j] = x[k];
      continue;
    }
    if (!e->next_arrival) throw DataError("event log lacks the scheduled next arrival");
    const double span = *e->next_arrival - *e->departure_time;
    const double frac = span > 0.0 ? (t - *e->departure_time) / span : 1.0;
    pos[j] = x[k] + (x[k + 1] - x[k]) * std::clamp(frac, 0.0, 1.0);
  }
  const double v = config.speed_mps();
  std::vector<double> out;
  for (std::size_t j = 0; j < pos.size(); ++j) {
    if (!pos[j]) continue;
    if (j > 0 && pos[j - 1]) {
      out.push_back((*pos[j - 1] - *pos[j]) / v);
    } else {
      out.push_back(config.dispatch_mean);
    }
  }
  return out;
}

HoldingEnv::HoldingEnv(sim::Simulation sim, EnvOptions options)
    : sim_(std::move(sim)),
      options_(options),
      graph_(sim_.config().n_stops()),
      open_(static_cast<std::size_t>(sim_.config().n_services)),
      last_(open_.size()) {
  options_.reward.validate();
  if (options_.joint_slots < 0) throw ConfigError("joint_slots must be >= 0");
}

void HoldingEnv::record_arrival(const sim::ArrivalEvent& event, const Observation& obs,
                                double action) {
  graph::EventNode node;
  node.bus_index = event.bus_index;
  node.time = event.time;
  node.stop = event.stop;
  node.obs = obs;
  node.action = action;
  graph_.record(node);
}

std::vector<double> HoldingEnv::joint_observation() const {
  const auto n = static_cast<std::size_t>(options_.joint_slots);
  std::vector<double> joint(n * kObservationSize, 0.0);
  const auto& config = sim_.config();
  std::size_t slot = 0;
  for (const auto& bus : sim_.buses()) {
    if (!bus.active()) continue;
    if (slot == n) break;
    const auto h = sim_.headways(bus.bus_index);
    joint[slot * kObservationSize + 0] = static_cast<double>(bus.occupancy) / config.capacity;
    joint[slot * kObservationSize + 1] = std::max(0.0, h.forward) / config.dispatch_mean;
    joint[slot * kObservationSize + 2] = std::max(0.0, h.backward) / config.dispatch_mean;
    ++slot;
  }
  return joint;
}

bool HoldingEnv::next() {
  if (current_) throw ProtocolError("HoldingEnv::next: the current decision has no action yet");
  while (!done_) {
    auto event = sim_.advance_to_next_arrival();
    if (!event) {
      done_ = true;
      break;
    }
    const Observation obs = observe(sim_, *event);
    const auto bus = static_cast<std::size_t>(event->bus_index);
    if (open_[bus]) {
      Decision& d = decisions_[*open_[bus]];
      d.reward = compute_reward(sim_, d, options_.reward);
      d.next_obs = obs;
      d.next_time = event->time;
      d.next_stop = event->stop;
      d.terminal = event->final_stop;
      open_[bus].reset();
    }
    if (event->final_stop) {
      record_arrival(*event, obs, 0.0);
      continue;
    }
    if (event->stop == 0) {
      // The terminal is not a control point.
      sim_.apply_holding(*event, 0.0);
      record_arrival(*event, obs, 0.0);
      continue;
    }
    Decision d;
    d.bus_index = event->bus_index;
    d.stop = event->stop;
    d.time = event->time;
    d.obs = obs;
    d.event_index = sim_.event_log().size() - 1;
    if (options_.joint_slots > 0) {
      d.joint_obs = joint_observation();
      int rank = 0;
      for (const auto& b : sim_.buses()) {
        if (b.bus_index == d.bus_index) break;
        if (b.active()) ++rank;
      }
      d.joint_slot = rank < options_.joint_slots ? rank : -1;
    }
    current_ = std::move(d);
    current_event_ = *event;
    return true;
  }
  return false;
}

const Decision& HoldingEnv::current() const {
  if (!current_) throw StateError("HoldingEnv: no decision is pending");
  return *current_;
}

void HoldingEnv::act(double action) {
  if (!current_) throw ProtocolError("HoldingEnv::act: no decision is pending");
  const double hold = action_to_hold_seconds(action, sim_.config().max_hold);
  sim_.apply_holding(*current_event_, hold);
  Decision d = std::move(*current_);
  current_.reset();
  d.action = action;
  d.hold = hold;
  record_arrival(*current_event_, d.obs, action);
  const auto bus = static_cast<std::size_t>(d.bus_index);
  const std::size_t id = decisions_.size();
  if (last_[bus]) decisions_[*last_[bus]].successor = id;
  open_[bus] = id;
  last_[bus] = id;
  decisions_.push_back(std::move(d));
}

EpisodeResult rollout_episode(sim::Simulation sim, const Policy& policy, EnvOptions options) {
  HoldingEnv env(std::move(sim), options);
  while (env.next()) env.act(policy(env.current()));
  EpisodeResult result{{}, env.simulation(), env.event_graph()};
  for (const auto& d : env.decisions()) {
    if (d.finalized()) result.decisions.push_back(d);
  }
  return result;
}

namespace {

const std::vector<std::string> kTraceHeader = {"bus",    "stop",   "t",      "obs_occ", "obs_fh",
                                               "obs_bh", "action", "hold_s", "reward",  "terminal"};

}  // namespace

void write_decision_trace(const std::filesystem::path& path, std::span<const Decision> decisions) {
  io::CsvWriter out(path, kTraceHeader);
  for (const auto& d : decisions) {
    out.cell(d.bus_index).cell(d.stop).cell(d.time);
    out.cell(d.obs.occupancy).cell(d.obs.forward).cell(d.obs.backward);
    out.cell(d.action).cell(d.hold);
    if (d.reward) {
      out.cell(*d.reward);
    } else {
      out.empty();
    }
    out.cell(d.terminal ? 1 : 0);
    out.end_row();
  }
  out.close();
}

std::vector<Decision> read_decision_trace(const std::filesystem::path& path) {
  const auto table = io::read_csv(path, kTraceHeader);
  std::vector<Decision> out;
  for (const auto& row : table.rows) {
    Decision d;
    d.bus_index = static_cast<int>(io::parse_int(row[0], "bus"));
    d.stop = static_cast<int>(io::parse_int(row[1], "stop"));
    d.time = io::parse_double(row[2], "t");
    d.obs.occupancy = io::parse_double(row[3], "obs_occ");
    d.obs.forward = io::parse_double(row[4], "obs_fh");
    d.obs.backward = io::parse_double(row[5], "obs_bh");
    d.action = io::parse_double(row[6], "action");
    d.hold = io::parse_double(row[7], "hold_s");
    if (!row[8].empty()) d.reward = io::parse_double(row[8], "reward");
    d.terminal = io::parse_int(row[9], "terminal") != 0;
    out.push_back(d);
  }
  return out;
}

}  // namespace caac::env
