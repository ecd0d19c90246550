#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "caac/env/observation.hpp"
#include "caac/graph/event_graph.hpp"
#include "caac/sim/simulator.hpp"

namespace caac::env {

struct RewardConfig {
  double w = 0.2;       // weight of the holding penalty
  double gamma = 0.99;  // discount

  void validate() const;
};

/// One holding decision, filled in as the episode unfolds: observation and
/// action at the stop, reward and next observation when the same bus reaches
/// its next stop.
struct Decision {
  int bus_index = 0;
  int stop = 0;
  double time = 0.0;
  Observation obs;
  double action = 0.0;
  double hold = 0.0;
  std::size_t event_index = 0;  // into Simulation::event_log()

  std::optional<double> reward;
  std::optional<Observation> next_obs;
  double next_time = 0.0;
  int next_stop = 0;
  bool terminal = false;                 // the next stop is the last one
  std::optional<std::size_t> successor;  // the same bus's next decision

  // Joint snapshot for centralized critics (filled when requested).
  std::vector<double> joint_obs;
  int joint_slot = -1;

  bool finalized() const { return reward.has_value(); }
  bool operator==(const Decision&) const = default;
};

/// Snapshot observation of the bus that produced `event`, taken at the current clock.
Observation observe(const sim::Simulation& sim, const sim::ArrivalEvent& event);

/// a * max_hold; throws ArgumentError unless 0 <= a <= 1.
double action_to_hold_seconds(double a, double max_hold);

/// Population Var/mean^2, or 0 when fewer than two headways are given.
double headway_cv2_term(std::span<const double> headways);
double reward_from_headways(std::span<const double> headways, double action, double w);
/// Reward for `decision` using the fleet's forward headways at the current clock.
double compute_reward(const sim::Simulation& sim, const Decision& decision,
                      const RewardConfig& config);

/// Forward headways of the buses active right after event `index` of `log`,
/// rebuilt from the log alone (positions interpolated along each leg).
std::vector<double> forward_headways_from_log(std::span<const sim::ArrivalEvent> log,
                                              const sim::RouteConfig& config,
                                              std::size_t index);

struct EnvOptions {
  RewardConfig reward;
  int joint_slots = 0;  // > 0: record joint observations with this many slots
};

/// Asynchronous decision stream over one simulation. `next()` advances to the
/// next bus that must decide; `act()` applies its hold. Arrivals at the
/// terminal and at the last stop are recorded but need no decision.
class HoldingEnv {
 public:
  HoldingEnv(sim::Simulation sim, EnvOptions options = {});

  /// False once the episode is over.
  bool next();
  /// The decision awaiting an action. Throws StateError if there is none.
  const Decision& current() const;
  void act(double action);

  const std::vector<Decision>& decisions() const { return decisions_; }
  const graph::EventLog& event_graph() const { return graph_; }
  const sim::Simulation& simulation() const { return sim_; }
  const EnvOptions& options() const { return options_; }
  double clock() const { return sim_.clock(); }
  bool done() const { return done_; }

 private:
  void record_arrival(const sim::ArrivalEvent& event, const Observation& obs, double action);
  std::vector<double> joint_observation() const;

  sim::Simulation sim_;
  EnvOptions options_;
  graph::EventLog graph_;
  std::vector<Decision> decisions_;
  std::vector<std::optional<std::size_t>> open_;  // per bus, decision awaiting its reward
  std::vector<std::optional<std::size_t>> last_;  // per bus, latest decision
  std::optional<Decision> current_;
  std::optional<sim::ArrivalEvent> current_event_;
  bool done_ = false;
};

using Policy = std::function<double(const Decision&)>;

struct EpisodeResult {
  std::vector<Decision> decisions;  // only those that received a reward
  sim::Simulation sim;
  graph::EventLog event_graph;
};

/// Runs a fresh simulation to completion with `policy`.
EpisodeResult rollout_episode(sim::Simulation sim, const Policy& policy, EnvOptions options = {});

void write_decision_trace(const std::filesystem::path& path, std::span<const Decision> decisions);
std::vector<Decision> read_decision_trace(const std::filesystem::path& path);

}  // namespace caac::env
