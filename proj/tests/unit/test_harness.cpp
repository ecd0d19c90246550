#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <regex>

#include "caac/errors.hpp"
#include "caac/harness/harness.hpp"
#include "caac/io/logs.hpp"
#include "support.hpp"

using namespace caac;
using namespace caac::harness;
using caac::testing::TempDir;
using caac::testing::slurp;

namespace {

sim::RouteSpec tiny_route(int n_stops = 6, int buses = 3) {
  sim::RouteSpec r;
  r.name = "tiny" + std::to_string(n_stops);
  for (int k = 0; k < n_stops; ++k) r.config.stop_positions.push_back(400.0 * k);
  r.config.n_services = buses;
  r.config.dispatch_mean = 240.0;
  r.config.dispatch_std = 60.0;
  r.config.capacity = 60;
  r.config.horizon = 3600.0;
  r.demand = sim::synthetic_demand(n_stops, 1.0 / 60.0, 2.0);
  return r;
}

std::filesystem::path write_route(const TempDir& dir, const sim::RouteSpec& route) {
  const auto path = dir / (route.name + ".json");
  sim::save_route_file(route, path);
  return path;
}

ExperimentConfig small_experiment(const TempDir& dir, const std::filesystem::path& route) {
  ExperimentConfig c;
  c.route = route.string();
  c.episodes = 2;
  c.seeds = {3};
  c.eval_seeds = {11, 12};
  c.out_dir = dir.path();
  c.parallel = false;
  c.agent.batch_size = 8;
  c.agent.warmup = 8;
  return c;
}

std::vector<MetricsRow> of_policy(const std::vector<MetricsRow>& rows, const std::string& label) {
  std::vector<MetricsRow> out;
  for (const auto& r : rows) {
    if (r.policy == label) out.push_back(r);
  }
  return out;
}

}  // namespace

TEST(Train, OneEpisodeGivesOneCurveRowAndACheckpoint) {
  TempDir dir;
  auto c = small_experiment(dir, write_route(dir, tiny_route()));
  c.episodes = 1;
  const auto summary = cmd_train(c);
  ASSERT_EQ(summary.checkpoints.size(), 1u);
  EXPECT_TRUE(std::filesystem::exists(summary.checkpoints[0]));
  const auto curve = read_curve(summary.curves[0]);
  ASSERT_EQ(curve.size(), 1u);
  EXPECT_EQ(curve[0].episode, 0);
  EXPECT_GE(curve[0].demand_scale, c.demand_scale_min);
  EXPECT_LE(curve[0].demand_scale, c.demand_scale_max);
  EXPECT_LE(curve[0].mean_reward, 0.0);
  const auto doc = read_json_file(summary.checkpoints[0]);
  EXPECT_EQ(doc["episodes_done"], 1);
  EXPECT_EQ(load_checkpoint(summary.checkpoints[0])->kind(), "caac");
}

TEST(Train, CurveIsIdenticalAcrossRuns) {
  TempDir a;
  TempDir b;
  const auto route = tiny_route();
  auto ca = small_experiment(a, write_route(a, route));
  auto cb = small_experiment(b, write_route(b, route));
  const auto sa = cmd_train(ca);
  const auto sb = cmd_train(cb);
  EXPECT_EQ(slurp(sa.curves[0]), slurp(sb.curves[0]));
  EXPECT_EQ(slurp(sa.checkpoints[0]), slurp(sb.checkpoints[0]));
  EXPECT_GT(read_curve(sa.curves[0]).back().critic_loss, 0.0);
}

TEST(Train, ResumeContinuesToTheSameState) {
  TempDir whole;
  TempDir split;
  const auto route = tiny_route();
  auto full = small_experiment(whole, write_route(whole, route));
  full.episodes = 2;
  full.agent.warmup = 100000;  // no updates, so replay contents do not matter across the split
  full.agent.buffer_capacity = 100000;
  const auto straight = cmd_train(full);

  auto first = small_experiment(split, write_route(split, route));
  first.agent = full.agent;
  first.episodes = 1;
  const auto half = cmd_train(first);
  auto second = first;
  second.episodes = 2;
  second.resume = half.checkpoints[0];
  second.out_dir = split / "more";
  const auto rest = cmd_train(second);
  const auto curve = read_curve(rest.curves[0]);
  ASSERT_EQ(curve.size(), 1u);
  EXPECT_EQ(curve[0].episode, 1);
  EXPECT_EQ(read_json_file(rest.checkpoints[0])["episodes_done"], 2);
  const auto whole_curve = read_curve(straight.curves[0]);
  ASSERT_EQ(whole_curve.size(), 2u);
  EXPECT_EQ(whole_curve[1].demand_scale, curve[0].demand_scale);
  EXPECT_EQ(slurp(straight.checkpoints[0]), slurp(rest.checkpoints[0]));
}

TEST(Train, RuleAndUnknownPoliciesAreRejected) {
  const auto route = tiny_route();
  ExperimentConfig c;
  EXPECT_THROW(train_seed(c, route, "fh", 0), ConfigError);
  EXPECT_THROW(make_learner("greedy", c.agent, 3, 0), ConfigError);
}

TEST(Svg, BytesAreDeterministic) {
  TempDir dir;
  const auto route = tiny_route();
  ExperimentConfig c;
  const auto run = run_episode(c, route, rule_policy("fh"), 5);
  emit_trajectory_svg(run.result.sim.event_log(), route.config, dir / "a.svg");
  emit_trajectory_svg(run.result.sim.event_log(), route.config, dir / "b.svg");
  const auto again = run_episode(c, route, rule_policy("fh"), 5);
  emit_trajectory_svg(again.result.sim.event_log(), route.config, dir / "c.svg");
  EXPECT_EQ(slurp(dir / "a.svg"), slurp(dir / "b.svg"));
  EXPECT_EQ(slurp(dir / "a.svg"), slurp(dir / "c.svg"));
}

TEST(Svg, SingleBusOverTwoStopsIsOnePolylineWithTwoPlateaus) {
  TempDir dir;
  sim::RouteConfig cfg;
  cfg.stop_positions = {0.0, 1000.0};
  std::vector<sim::ArrivalEvent> events(2);
  events[0] = {0, 0, 0.0, 0, 2, 10.0, 6.0, 4.0, 2, false, 130.0};
  events[1] = {0, 1, 130.0, 2, 0, 130.0, 3.6, 0.0, 0, true, std::nullopt};
  emit_trajectory_svg(events, cfg, dir / "one.svg");
  const std::string svg = slurp(dir / "one.svg");
  const std::regex poly("<polyline[^>]*points=\"([^\"]*)\"");
  std::vector<std::string> lines;
  for (auto it = std::sregex_iterator(svg.begin(), svg.end(), poly); it != std::sregex_iterator();
       ++it) {
    lines.push_back((*it)[1]);
  }
  ASSERT_EQ(lines.size(), 1u);
  std::vector<std::pair<double, double>> pts;
  std::istringstream in(lines[0]);
  std::string pair;
  while (in >> pair) {
    const auto comma = pair.find(',');
    pts.emplace_back(std::stod(pair.substr(0, comma)), std::stod(pair.substr(comma + 1)));
  }
  ASSERT_EQ(pts.size(), 4u);
  EXPECT_EQ(pts[0].second, pts[1].second);  // dwell at stop 0
  EXPECT_LT(pts[0].first, pts[1].first);
  EXPECT_EQ(pts[2].second, pts[3].second);  // final stop
  EXPECT_GT(pts[1].second, pts[2].second);  // y grows downward, distance upward
}

TEST(Svg, EmptyLogThrows) {
  TempDir dir;
  sim::RouteConfig cfg;
  cfg.stop_positions = {0.0, 1000.0};
  EXPECT_THROW(emit_trajectory_svg({}, cfg, dir / "x.svg"), ArgumentError);
}

TEST(Eval, RowCountIsRoutesTimesPoliciesTimesSeeds) {
  TempDir dir;
  auto c = small_experiment(dir, write_route(dir, tiny_route()));
  c.eval_seeds = {1, 2, 3};
  const auto rows = cmd_eval(c);
  EXPECT_EQ(rows.size(), 2u * 3u);
  const auto read = read_metrics(dir / "metrics.csv");
  EXPECT_EQ(read.size(), rows.size());

  c.transfer_routes = {write_route(dir, tiny_route(5, 2)).string(),
                       write_route(dir, tiny_route(7, 3)).string()};
  const auto transfer = cmd_transfer(c);
  EXPECT_EQ(transfer.size(), 2u * 2u * 3u);
}

TEST(Eval, NoControlDeltasAreZeroAndRowsReadBack) {
  TempDir dir;
  auto c = small_experiment(dir, write_route(dir, tiny_route()));
  const auto rows = cmd_eval(c);
  for (const auto& r : of_policy(rows, "nc")) {
    EXPECT_EQ(r.d_aht, 0.0);
    EXPECT_EQ(r.d_awt, 0.0);
    EXPECT_EQ(r.d_ajt, 0.0);
    EXPECT_EQ(r.d_att, 0.0);
    EXPECT_EQ(r.d_aod, 0.0);
  }
  const auto read = read_metrics(dir / "metrics.csv");
  ASSERT_EQ(read.size(), rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    EXPECT_EQ(read[i].policy, rows[i].policy);
    EXPECT_EQ(read[i].seed, rows[i].seed);
    EXPECT_NEAR(read[i].awt, rows[i].awt, 1e-9 * std::max(1.0, std::abs(rows[i].awt)));
  }
}

TEST(Eval, DeltasMatchRecomputationFromRawLogs) {
  TempDir dir;
  const auto route = tiny_route();
  auto c = small_experiment(dir, write_route(dir, route));
  const auto rows =
      evaluate_route(c, route, {rule_policy("fh")}, c.eval_seeds, dir / "logs");
  for (const auto& r : of_policy(rows, "fh")) {
    const auto stem = [&](const std::string& p) {
      return dir / "logs" / (route.name + "_" + p + "_seed" + std::to_string(r.seed));
    };
    auto recompute = [&](const std::string& p) {
      const auto events = io::read_event_log(stem(p).string() + "_events.csv", route.config.n_stops());
      const auto pax = io::read_passenger_log(stem(p).string() + "_passengers.csv");
      const auto decisions = env::read_decision_trace(stem(p).string() + "_trace.csv");
      return metrics::compute_metrics(events, pax, decisions, route.config);
    };
    const auto fh = recompute("fh");
    const auto nc = recompute("nc");
    EXPECT_NEAR(r.d_awt, fh.awt - nc.awt, 1e-6);
    EXPECT_NEAR(r.d_aod, fh.aod - nc.aod, 1e-9);
    EXPECT_NEAR(r.d_aht, fh.aht - nc.aht, 1e-6);
    EXPECT_NEAR(r.d_att, fh.att - nc.att, 1e-6);
  }
}

TEST(Eval, TransferToTheTrainingRouteEqualsEval) {
  TempDir dir;
  const auto route_path = write_route(dir, tiny_route());
  auto c = small_experiment(dir, route_path);
  c.episodes = 1;
  const auto trained = cmd_train(c);
  c.checkpoints = trained.checkpoints;
  const auto eval = cmd_eval(c);
  c.transfer_routes = {route_path.string()};
  const auto transfer = cmd_transfer(c);
  ASSERT_EQ(eval.size(), transfer.size());
  for (std::size_t i = 0; i < eval.size(); ++i) {
    EXPECT_EQ(eval[i].policy, transfer[i].policy);
    EXPECT_EQ(eval[i].awt, transfer[i].awt);
    EXPECT_EQ(eval[i].d_aod, transfer[i].d_aod);
  }
}

TEST(Eval, LearnedPolicyIsDeterministicAndRunsOnOtherStopCounts) {
  TempDir dir;
  auto c = small_experiment(dir, write_route(dir, tiny_route()));
  c.episodes = 1;
  c.checkpoints = cmd_train(c).checkpoints;
  cmd_eval(c);
  const std::string first = slurp(dir / "metrics.csv");
  cmd_eval(c);
  EXPECT_EQ(first, slurp(dir / "metrics.csv"));

  c.route = write_route(dir, tiny_route(9, 4)).string();
  const auto rows = cmd_eval(c);
  const auto learned = of_policy(rows, "caac_seed3");
  ASSERT_EQ(learned.size(), c.eval_seeds.size());
  for (const auto& r : learned) EXPECT_TRUE(std::isfinite(r.awt));
}

TEST(Eval, PolicyWithoutCheckpointThrows) {
  ExperimentConfig c;
  PolicyHandle p{"caac", "caac", nullptr};
  EXPECT_THROW(run_episode(c, tiny_route(), p, 1), ConfigError);
  EXPECT_THROW(rule_policy("caac"), ConfigError);
}

TEST(Checkpoint, TruncatedFileIsAFormatError) {
  TempDir dir;
  auto c = small_experiment(dir, write_route(dir, tiny_route()));
  c.episodes = 1;
  const auto path = cmd_train(c).checkpoints[0];
  const std::string text = slurp(path);
  {
    std::ofstream out(dir / "cut.json");
    out << text.substr(0, text.size() / 2);
  }
  EXPECT_THROW(load_checkpoint(dir / "cut.json"), FormatError);
  EXPECT_THROW(load_checkpoint(dir / "absent.json"), IoError);

  auto doc = read_json_file(path);
  doc["networks"].erase("critic");
  write_json_file(dir / "nocritic.json", doc);
  EXPECT_THROW(load_checkpoint(dir / "nocritic.json"), FormatError);
}

TEST(Config, JsonErrorsAreConfigErrors) {
  TempDir dir;
  EXPECT_THROW(experiment_from_json(nlohmann::json::array()), ConfigError);
  EXPECT_THROW(experiment_from_json({{"episodes", "many"}}), ConfigError);
  EXPECT_THROW(experiment_from_json({{"episodes", 0}}), ConfigError);
  EXPECT_THROW(experiment_from_json({{"policy", "greedy"}}), ConfigError);
  EXPECT_THROW(experiment_from_json({{"rule_policies", {"caac"}}}), ConfigError);
  EXPECT_THROW(experiment_from_json({{"demand_scale", {1.2, 0.8}}}), ConfigError);
  EXPECT_THROW(experiment_from_json({{"demand_scale", {1.0}}}), ConfigError);
  EXPECT_THROW(experiment_from_json({{"agent", {{"gamma", 2.0}}}}), ConfigError);
  EXPECT_THROW(load_experiment_file(dir / "missing.json"), ConfigError);
  {
    std::ofstream out(dir / "bad.json");
    out << "{ not json";
  }
  EXPECT_THROW(load_experiment_file(dir / "bad.json"), ConfigError);
}

TEST(Config, JsonKeysOverrideDefaults) {
  const auto c = experiment_from_json({{"route", "R2s"},
                                       {"episodes", 7},
                                       {"seeds", {4, 5}},
                                       {"demand_scale", {0.9, 1.1}},
                                       {"train_horizon_s", 3600.0},
                                       {"agent", {{"actor_lr", 0.002}}}});
  EXPECT_EQ(c.route, "R2s");
  EXPECT_EQ(c.episodes, 7);
  EXPECT_EQ(c.seeds, (std::vector<std::uint64_t>{4, 5}));
  EXPECT_EQ(c.demand_scale_min, 0.9);
  EXPECT_EQ(*c.train_horizon, 3600.0);
  EXPECT_EQ(c.agent.actor_lr, 0.002);
  EXPECT_EQ(c.agent.critic_lr, agent::CaacConfig{}.critic_lr);
}

TEST(Config, DeskExperimentShape) {
  const auto c = desk_scale_experiment();
  EXPECT_EQ(c.route, "desk");
  EXPECT_EQ(c.episodes, 50);
  EXPECT_EQ(c.seeds.size(), 5u);
  EXPECT_EQ(c.eval_seeds.size(), 10u);
  EXPECT_NO_THROW(c.validate());
}

TEST(Eval, DemandScaleIsSharedAcrossPoliciesOnASeed) {
  ExperimentConfig c;
  const double s = eval_demand_scale(c, 42);
  EXPECT_EQ(s, eval_demand_scale(c, 42));
  EXPECT_GE(s, c.demand_scale_min);
  EXPECT_LE(s, c.demand_scale_max);
  const auto route = tiny_route();
  EXPECT_EQ(run_episode(c, route, rule_policy("nc"), 42).demand_scale, s);
  EXPECT_EQ(run_episode(c, route, rule_policy("fh"), 42).demand_scale, s);
}
