#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "caac/agent/agent.hpp"
#include "caac/baselines/baselines.hpp"
#include "caac/env/env.hpp"
#include "caac/metrics/metrics.hpp"
#include "caac/sim/route.hpp"

namespace caac::harness {

struct ExperimentConfig {
  std::string route = "desk";               // preset name or route config path
  std::vector<std::string> transfer_routes;  // evaluation targets for transfer
  std::string policy = "caac";  // what `train` trains
  std::vector<std::string> rule_policies = {"nc", "fh"};  // evaluated next to the checkpoints
  int episodes = 50;
  std::vector<std::uint64_t> seeds = {0};       // training seeds
  std::vector<std::uint64_t> eval_seeds = {1000};
  double demand_scale_min = 0.8;
  double demand_scale_max = 1.2;
  std::optional<double> train_horizon;  // shorter training episodes, s
  std::filesystem::path out_dir = "out";
  std::optional<std::filesystem::path> resume;      // train: continue from this checkpoint
  std::vector<std::filesystem::path> checkpoints;  // eval / transfer: learned policies
  int checkpoint_every = 10;         // episodes; the final one is always written
  bool parallel = true;
  agent::CaacConfig agent;
  double fh_mean_delay = 30.0;
  double fh_gain = 0.15;

  void validate() const;
};

/// Keys mirror the field names; "agent" holds agent config keys. Throws ConfigError.
ExperimentConfig experiment_from_json(const nlohmann::json& doc);
ExperimentConfig load_experiment_file(const std::filesystem::path& path);
/// 20 stops, 8 buses, 4 h, 50 episodes, 5 training seeds, 10 evaluation seeds.
ExperimentConfig desk_scale_experiment();

bool is_learning_policy(const std::string& policy);
std::vector<std::string> policy_names();

/// kind in {caac, iac, maddpg}; `slots` is the MADDPG fleet size.
std::unique_ptr<agent::Learner> make_learner(const std::string& kind,
                                             const agent::CaacConfig& config, int slots,
                                             std::uint64_t seed);

struct CurveRow {
  int episode = 0;
  double demand_scale = 1.0;
  double mean_reward = 0.0;
  double awt = 0.0;
  double aod = 0.0;
  double critic_loss = 0.0;
  double actor_loss = 0.0;
};

struct TrainOutcome {
  std::unique_ptr<agent::Learner> learner;
  std::vector<CurveRow> curve;
  int episodes_done = 0;
};

/// Trains one seed. `resume`, if given, is a checkpoint to continue from;
/// with `checkpoint_path` set, checkpoints are written every config.checkpoint_every episodes.
TrainOutcome train_seed(const ExperimentConfig& config, const sim::RouteSpec& route,
                        const std::string& policy, std::uint64_t seed,
                        const nlohmann::json* resume = nullptr,
                        const std::filesystem::path* checkpoint_path = nullptr);

void write_curve(const std::filesystem::path& path, const std::vector<CurveRow>& rows);
std::vector<CurveRow> read_curve(const std::filesystem::path& path);

nlohmann::json read_json_file(const std::filesystem::path& path);
void write_json_file(const std::filesystem::path& path, const nlohmann::json& doc);
/// Checkpoint file with the harness's "episodes_done" field.
void save_checkpoint(const std::filesystem::path& path, const agent::Learner& learner,
                     int episodes_done);
/// Throws FormatError for unreadable, truncated or mismatched checkpoints.
std::unique_ptr<agent::Learner> load_checkpoint(const std::filesystem::path& path);
std::unique_ptr<agent::Learner> load_learner(const nlohmann::json& doc);

struct TrainSummary {
  std::vector<std::filesystem::path> checkpoints;  // one per seed
  std::vector<std::filesystem::path> curves;
};

/// Trains every seed (in parallel across seeds) and writes
/// <out>/<policy>_seed<k>.json and <out>/<policy>_seed<k>_curve.csv.
TrainSummary cmd_train(const ExperimentConfig& config);

/// One evaluated policy: a fixed rule or a trained learner.
struct PolicyHandle {
  std::string name;   // nc, fh, caac, iac, maddpg
  std::string label;  // name plus checkpoint tag
  std::shared_ptr<const agent::Learner> learner;
};

PolicyHandle rule_policy(const std::string& name);
PolicyHandle learned_policy(std::shared_ptr<const agent::Learner> learner, std::string label);

struct EpisodeRun {
  env::EpisodeResult result;
  metrics::EpisodeMetrics metrics;
  double demand_scale = 1.0;
};

/// Demand scale of evaluation seed `seed` (shared by every policy on that seed).
double eval_demand_scale(const ExperimentConfig& config, std::uint64_t seed);
/// One deterministic evaluation episode.
EpisodeRun run_episode(const ExperimentConfig& config, const sim::RouteSpec& route,
                       const PolicyHandle& policy, std::uint64_t seed);

struct MetricsRow {
  std::string route;
  std::string policy;
  std::uint64_t seed = 0;
  double demand_scale = 1.0;
  double aht = 0.0, awt = 0.0, ajt = 0.0, att = 0.0, aod = 0.0;
  double d_aht = 0.0, d_awt = 0.0, d_ajt = 0.0, d_att = 0.0, d_aod = 0.0;  // minus NC
  std::string note;
};

/// Every policy on every seed of one route, with NC rows as the reference.
/// When `log_dir` is set, each run's event, passenger and decision logs are written there.
std::vector<MetricsRow> evaluate_route(const ExperimentConfig& config, const sim::RouteSpec& route,
                                       const std::vector<PolicyHandle>& policies,
                                       const std::vector<std::uint64_t>& seeds,
                                       const std::optional<std::filesystem::path>& log_dir = {});

void write_metrics(const std::filesystem::path& path, const std::vector<MetricsRow>& rows);
std::vector<MetricsRow> read_metrics(const std::filesystem::path& path);

/// Rule policies plus every checkpoint, labelled by file stem.
std::vector<PolicyHandle> evaluation_policies(const ExperimentConfig& config);
/// Evaluates them on config.route over config.eval_seeds; writes <out>/metrics.csv.
std::vector<MetricsRow> cmd_eval(const ExperimentConfig& config);
/// Same on each of config.transfer_routes without any parameter update; writes <out>/transfer.csv.
std::vector<MetricsRow> cmd_transfer(const ExperimentConfig& config);

/// Time-distance diagram, one group per bus, links colored by departing load.
void emit_trajectory_svg(std::span<const sim::ArrivalEvent> events, const sim::RouteConfig& config,
                         const std::filesystem::path& path);

}  // namespace caac::harness
