// Acceptance run: one PASS/FAIL line per criterion, thresholds fixed below.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <boost/math/distributions/students_t.hpp>

#include "caac/agent/agent.hpp"
#include "caac/agent/replay.hpp"
#include "caac/baselines/baselines.hpp"
#include "caac/env/env.hpp"
#include "caac/errors.hpp"
#include "caac/graph/event_graph.hpp"
#include "caac/harness/harness.hpp"
#include "caac/io/logs.hpp"
#include "caac/nn/gradcheck.hpp"
#include "caac/sim/route.hpp"

using namespace caac;
namespace fs = std::filesystem;

namespace {

// Exact gates.
constexpr double kGradTolerance = 1e-4;
constexpr double kGradSeconds = 60.0;
constexpr int kAttentionInstances = 10000;
constexpr double kAttentionTolerance = 1e-12;
constexpr int kPermutationInstances = 1000;
constexpr int kOracleLogs = 1000;
constexpr double kRewardTolerance = 1e-12;
constexpr int kIacSteps = 100;
constexpr double kBellmanTolerance = 1e-12;
constexpr int kConservationSeeds = 10;

// Trend gates.
constexpr double kConfidence = 0.95;
constexpr double kBunchingRatio = 3.0;
constexpr int kBunchingSeedsNeeded = 9;
constexpr int kLearnSeedsNeeded = 4;
constexpr int kCreditSeedsNeeded = 3;
constexpr int kCreditSeedsTarget = 4;
constexpr int kTrendSeedsNeeded = 4;
constexpr int kTransferEpisodes = 10;
const std::vector<std::uint64_t> kTransferSeeds = {0, 1, 2};
const std::vector<std::string> kTransferTargets = {"R2s", "R3s", "R4s"};

struct Verdict {
  bool pass = false;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string format(const char* pattern, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, pattern, args...);
  return buf;
}

double mean(const std::vector<double>& xs) {
  double s = 0.0;
  for (double x : xs) s += x;
  return xs.empty() ? 0.0 : s / static_cast<double>(xs.size());
}

// One-sided upper confidence bound of the mean (Student t).
double upper_bound(const std::vector<double>& xs, double confidence) {
  const auto n = static_cast<double>(xs.size());
  if (xs.size() < 2) return std::numeric_limits<double>::infinity();
  const double m = mean(xs);
  double ss = 0.0;
  for (double x : xs) ss += (x - m) * (x - m);
  const double se = std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
  boost::math::students_t dist(n - 1.0);
  return m + boost::math::quantile(dist, confidence) * se;
}

std::vector<double> ranks(const std::vector<double>& xs) {
  std::vector<std::size_t> order(xs.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return xs[a] < xs[b]; });
  std::vector<double> r(xs.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && xs[order[j + 1]] == xs[order[i]]) ++j;
    for (std::size_t k = i; k <= j; ++k) r[order[k]] = 0.5 * static_cast<double>(i + j);
    i = j + 1;
  }
  return r;
}

double spearman(const std::vector<double>& xs, const std::vector<double>& ys) {
  const auto rx = ranks(xs);
  const auto ry = ranks(ys);
  const double mx = mean(rx);
  const double my = mean(ry);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  return sxx > 0.0 && syy > 0.0 ? sxy / std::sqrt(sxx * syy) : 0.0;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// Transitions from one desk episode under a noisy constant rule.
std::vector<agent::Transition> desk_transitions(std::uint64_t seed) {
  const auto r = sim::preset_route("desk");
  env::HoldingEnv e(sim::Simulation::build(r.config, r.demand, seed));
  agent::ReplayBuffer buffer(100000);
  agent::TransitionAssembler assembler;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 0.6);
  while (e.next()) {
    e.act(u(rng));
    assembler.poll(e, buffer);
  }
  assembler.flush(e, buffer);
  std::vector<agent::Transition> out;
  for (std::size_t i = 0; i < buffer.size(); ++i) out.push_back(buffer.at(i));
  return out;
}

agent::NodeFeature random_row(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.5);
  return {u(rng), u(rng), u(rng), u(rng) / 1.5, u(rng) / 3.0, std::floor(u(rng) * 4.0)};
}

std::vector<agent::NodeFeature> random_rows(std::mt19937_64& rng, std::size_t n) {
  std::vector<agent::NodeFeature> rows;
  for (std::size_t i = 0; i < n; ++i) rows.push_back(random_row(rng));
  return rows;
}

// ---------------------------------------------------------------- exact gates

Verdict gradient_fidelity() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto ts = desk_transitions(3);
  const agent::Transition* both = nullptr;
  const agent::Transition* one = nullptr;
  const agent::Transition* none = nullptr;
  for (const auto& t : ts) {
    if (t.terminal) continue;
    if (!both && !t.up.empty() && !t.down.empty() && t.up.count() + t.down.count() >= 3) both = &t;
    if (!one && t.up.empty() != t.down.empty()) one = &t;
    if (!none && t.up.empty() && t.down.empty()) none = &t;
  }
  agent::Transition isolated = ts.front();
  isolated.up = {};
  isolated.down = {};
  if (none == nullptr) none = &isolated;
  if (both == nullptr || one == nullptr) return {false, "no transition with the needed neighbor sets"};

  agent::CaacAgent learner(agent::CaacConfig{}, agent::EventCriticMode::enabled, 17);
  double worst = 0.0;
  std::size_t coords = 0;
  std::string where;
  auto take = [&](const nn::GradCheckReport& r, const std::string& what) {
    coords += r.coordinates;
    if (r.max_relative_error >= worst) {
      worst = r.max_relative_error;
      where = what + ":" + r.worst_parameter;
    }
  };
  nn::GradCheckOptions opts;
  opts.tolerance = kGradTolerance;
  for (const agent::Transition* t : {both, one, none}) {
    const double y = learner.target_value(*t);
    take(nn::gradient_check([&](nn::Tape& tape) { return learner.sample_critic_loss(tape, *t, y); },
                            {&learner.critic().params, &learner.event_critic().params}, opts),
         "critic+event");
    take(nn::gradient_check([&](nn::Tape& tape) { return learner.sample_actor_loss(tape, *t); },
                            {&learner.actor_mut().params}, opts),
         "actor");
  }
  // Centralized critic of the MADDPG baseline over an 8-slot joint input.
  std::mt19937_64 rng(5);
  auto joint = agent::ValueNet::create("joint_critic", 8 * (env::kObservationSize + 1),
                                       agent::NetworkSizes{}, rng);
  std::vector<double> input(8 * (env::kObservationSize + 1));
  std::uniform_real_distribution<double> u(0.0, 1.5);
  for (auto& v : input) v = u(rng);
  take(nn::gradient_check(
           [&](nn::Tape& tape) { return tape.square(joint.forward(tape, tape.constant(input))); },
           {&joint.params}, opts),
       "joint_critic");
  const double secs = seconds_since(t0);
  return {worst < kGradTolerance && secs < kGradSeconds,
          format("max rel err %.2e at %s over %zu coordinates, %.1f s (limit %.0e, %.0f s)", worst,
                 where.c_str(), coords, secs, kGradTolerance, kGradSeconds)};
}

Verdict attention_normalization() {
  std::mt19937_64 rng(8);
  const auto net = agent::EventCriticNet::create(agent::NetworkSizes{}, rng);
  std::uniform_int_distribution<std::size_t> count(1, 12);
  double worst = 0.0;
  for (int i = 0; i < kAttentionInstances; ++i) {
    nn::Tape tape;
    const auto ego = random_row(rng);
    const auto& block = i % 2 == 0 ? net.up : net.down;
    const auto alpha =
        tape.value(net.attention_weights(tape, block, tape.constant(ego), agent::make_side(random_rows(rng, count(rng)))));
    double total = 0.0;
    for (double a : alpha) total += a;
    worst = std::max(worst, std::abs(total - 1.0));
  }
  int broken = 0;
  for (int i = 0; i < kPermutationInstances; ++i) {
    const auto ego = random_row(rng);
    auto up = random_rows(rng, count(rng) % 7);
    auto down = random_rows(rng, count(rng) % 5);
    nn::Tape a;
    const double base =
        a.scalar(net.forward(a, a.constant(ego), agent::make_side(up), agent::make_side(down)).value);
    std::shuffle(up.begin(), up.end(), rng);
    std::shuffle(down.begin(), down.end(), rng);
    nn::Tape b;
    const double shuffled =
        b.scalar(net.forward(b, b.constant(ego), agent::make_side(up), agent::make_side(down)).value);
    if (base != shuffled) ++broken;
  }
  return {worst <= kAttentionTolerance && broken == 0,
          format("max |sum alpha - 1| %.1e over %d instances; %d of %d permutations changed U", worst,
                 kAttentionInstances, broken, kPermutationInstances)};
}

Verdict oracle_equivalence() {
  std::mt19937_64 rng(31);
  int mismatches = 0;
  std::size_t neighbors = 0;
  for (int trial = 0; trial < kOracleLogs; ++trial) {
    std::uniform_int_distribution<int> stops_dist(3, 30);
    std::uniform_int_distribution<int> buses_dist(1, 12);
    const int stops = stops_dist(rng);
    const int buses = buses_dist(rng);
    graph::EventLog log(stops);
    std::uniform_int_distribution<int> bus(0, buses - 1);
    std::uniform_int_distribution<int> stop(0, stops - 1);
    std::uniform_int_distribution<int> size(0, 200);
    std::exponential_distribution<double> gap(1.0 / 30.0);
    std::bernoulli_distribution tie(0.1);
    double t = 0.0;
    const int n = size(rng);
    for (int i = 0; i < n; ++i) {
      if (!tie(rng)) t += gap(rng);
      graph::EventNode node;
      node.bus_index = bus(rng);
      node.stop = stop(rng);
      node.time = t;
      log.record(node);
    }
    std::uniform_real_distribution<double> at(-10.0, t + 10.0);
    std::uniform_real_distribution<double> len(1e-3, 600.0);
    double begin = at(rng);
    if (n > 0 && tie(rng)) begin = log.nodes()[static_cast<std::size_t>(size(rng) % n)].time;
    const double end = begin + len(rng);
    const int ego = bus(rng);
    const int ego_stop = stop(rng);
    const auto fast = log.neighbor_sets(ego, ego_stop, begin, end);
    const auto slow = log.oracle_neighbor_sets(ego, ego_stop, begin, end);
    if (!(fast == slow)) ++mismatches;
    neighbors += fast.upstream.size() + fast.downstream.size();
  }
  return {mismatches == 0, format("%d mismatches over %d random logs (%zu neighbors compared)",
                                  mismatches, kOracleLogs, neighbors)};
}

Verdict reward_arithmetic() {
  const std::vector<double> hand = {300.0, 900.0};
  const double r = env::reward_from_headways(hand, 0.5, 0.2);
  const double hand_err = std::abs(r - (-0.30));
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> h(1.0, 1500.0);
  std::uniform_real_distribution<double> c(0.01, 100.0);
  double scale_err = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<double> hs(2 + trial % 20);
    for (auto& x : hs) x = h(rng);
    const double k = c(rng);
    std::vector<double> scaled(hs);
    for (auto& x : scaled) x *= k;
    scale_err = std::max(scale_err, std::abs(env::headway_cv2_term(hs) - env::headway_cv2_term(scaled)));
  }
  return {hand_err <= kRewardTolerance && scale_err <= kRewardTolerance,
          format("hand case r = %.15f (err %.1e); max CV2 scale drift %.1e", r, hand_err, scale_err)};
}

Verdict iac_equivalence() {
  const auto ts = desk_transitions(7);
  agent::ReplayBuffer buffer(10000);
  for (const auto& t : ts) buffer.push(t);
  agent::CaacConfig config;
  agent::CaacAgent caac(config, agent::EventCriticMode::frozen, 42);
  caac.zero_event_critic();
  auto iac = baselines::iac_factory(config, 42);
  std::mt19937_64 r1(9);
  std::mt19937_64 r2(9);
  for (int step = 0; step < kIacSteps; ++step) {
    const auto s1 = caac.train_step(buffer, r1);
    const auto s2 = iac->train_step(buffer, r2);
    const bool same = s1.critic_loss == s2.critic_loss && s1.actor_objective == s2.actor_objective &&
                      caac.actor().params == iac->actor().params &&
                      caac.critic().params == iac->critic().params &&
                      caac.target_actor().params == iac->target_actor().params &&
                      caac.target_critic().params == iac->target_critic().params;
    if (!same) return {false, format("parameters diverge at step %d", step)};
  }
  return {true, format("%d steps bit-identical (actor, critic and targets)", kIacSteps)};
}

std::vector<double> dense(const nn::ParameterSet& p, const std::string& w, const std::string& b,
                          const std::vector<double>& x) {
  const auto& W = p[p.index_of(w)].value;
  const auto& B = p[p.index_of(b)].value;
  std::vector<double> y(W.rows());
  for (std::size_t r = 0; r < W.rows(); ++r) {
    double s = B.data[r];
    for (std::size_t c = 0; c < W.cols(); ++c) s += W.data[r * W.cols() + c] * x[c];
    y[r] = s;
  }
  return y;
}

double reference_q(const agent::ValueNet& net, const env::Observation& obs, double a) {
  auto act = [](std::vector<double> v) {
    for (auto& x : v) x = std::tanh(x);
    return v;
  };
  const auto& p = net.params;
  auto h = act(dense(p, "critic.l0.w", "critic.l0.b", {obs.occupancy, obs.forward, obs.backward, a}));
  h = act(dense(p, "critic.l1.w", "critic.l1.b", h));
  return dense(p, "critic.l2.w", "critic.l2.b", h)[0];
}

Verdict bellman_degenerate() {
  const auto ts = desk_transitions(4);
  agent::CaacConfig config;
  config.gamma = 0.0;
  config.beta = 0.0;
  agent::CaacAgent learner(config, agent::EventCriticMode::enabled, 2);
  learner.zero_event_critic();
  std::vector<const agent::Transition*> batch;
  for (std::size_t i = 0; i < std::min<std::size_t>(64, ts.size()); ++i) batch.push_back(&ts[i]);
  double expected = 0.0;
  for (const auto* t : batch) {
    const double d = t->reward - reference_q(learner.critic(), t->obs, t->action);
    expected += d * d;
  }
  expected /= static_cast<double>(batch.size());
  const double got = learner.critic_loss(batch);
  const double err = std::abs(got - expected);
  return {err <= kBellmanTolerance,
          format("loss %.15f vs mean (r-Q)^2 %.15f over %zu transitions (err %.1e)", got, expected,
                 batch.size(), err)};
}

Verdict conservation() {
  const auto r = sim::preset_route("R1s");
  std::size_t events = 0;
  for (int seed = 0; seed < kConservationSeeds; ++seed) {
    auto s = sim::Simulation::build(r.config, r.demand, static_cast<std::uint64_t>(seed));
    while (auto ev = s.advance_to_next_arrival()) {
      ++events;
      if (!s.audit().conserved()) return {false, format("seed %d: passengers not conserved at event %zu", seed, events)};
      for (const auto& b : s.buses()) {
        if (b.occupancy < 0 || b.occupancy > r.config.capacity) {
          return {false, format("seed %d: bus %d occupancy %d outside [0, %d]", seed, b.bus_index,
                                b.occupancy, r.config.capacity)};
        }
      }
      if (!ev->final_stop) s.apply_holding(*ev, 0.0);
    }
    if (!s.audit().conserved()) return {false, format("seed %d: not conserved at the end", seed)};
  }
  return {true, format("%zu events over %d seeds, conserved and within capacity", events,
                       kConservationSeeds)};
}

Verdict determinism(const fs::path& work) {
  fs::remove_all(work);
  auto c = harness::desk_scale_experiment();
  c.episodes = 2;
  c.seeds = {0};
  c.eval_seeds = {1000, 1001};
  std::vector<std::string> differ;
  auto check = [&](const fs::path& a, const fs::path& b) {
    if (!fs::exists(a) || slurp(a) != slurp(b)) differ.push_back(a.filename().string());
  };
  harness::TrainSummary trained[2];
  for (int k = 0; k < 2; ++k) {
    c.out_dir = work / ("run" + std::to_string(k));
    trained[k] = harness::cmd_train(c);
  }
  check(trained[0].curves[0], trained[1].curves[0]);
  check(trained[0].checkpoints[0], trained[1].checkpoints[0]);

  const auto route = sim::preset_route("desk");
  std::size_t files = 2;
  for (int k = 0; k < 2; ++k) {
    const fs::path dir = work / ("run" + std::to_string(k));
    c.checkpoints = {trained[0].checkpoints[0]};
    c.out_dir = dir;
    const auto rows = harness::evaluate_route(c, route, harness::evaluation_policies(c), c.eval_seeds,
                                              dir / "logs");
    harness::write_metrics(dir / "metrics.csv", rows);
    const auto run = harness::run_episode(c, route, harness::rule_policy("nc"), 1000);
    harness::emit_trajectory_svg(run.result.sim.event_log(), route.config, dir / "nc.svg");
  }
  check(work / "run0" / "metrics.csv", work / "run1" / "metrics.csv");
  check(work / "run0" / "nc.svg", work / "run1" / "nc.svg");
  files += 2;
  for (const auto& entry : fs::directory_iterator(work / "run0" / "logs")) {
    check(entry.path(), work / "run1" / "logs" / entry.path().filename());
    ++files;
  }
  if (!differ.empty()) return {false, format("%zu of %zu files differ, first %s", differ.size(), files, differ[0].c_str())};
  return {true, format("%zu files byte-identical across two runs (logs, traces, CSVs, checkpoints, SVG)", files)};
}

// ---------------------------------------------------------------- trend gates

struct DeskStudy {
  harness::ExperimentConfig config;
  std::vector<harness::MetricsRow> rows;
  std::vector<fs::path> caac_checkpoints;
  std::vector<fs::path> iac_checkpoints;
  std::vector<fs::path> caac_curves;
  std::vector<double> nc_bunching_ratio;
  double seconds = 0.0;
};

DeskStudy run_desk_study(const fs::path& work) {
  const auto t0 = std::chrono::steady_clock::now();
  DeskStudy s;
  s.config = harness::desk_scale_experiment();
  s.config.out_dir = work;
  fs::remove_all(work);
  for (const std::string policy : {"caac", "iac"}) {
    auto c = s.config;
    c.policy = policy;
    const auto summary = harness::cmd_train(c);
    (policy == "caac" ? s.caac_checkpoints : s.iac_checkpoints) = summary.checkpoints;
    if (policy == "caac") s.caac_curves = summary.curves;
  }
  auto c = s.config;
  c.checkpoints = s.caac_checkpoints;
  c.checkpoints.insert(c.checkpoints.end(), s.iac_checkpoints.begin(), s.iac_checkpoints.end());
  s.rows = harness::cmd_eval(c);
  const auto route = sim::preset_route(s.config.route);
  for (auto seed : s.config.eval_seeds) {
    const auto run = harness::run_episode(s.config, route, harness::rule_policy("nc"), seed);
    const double dispatch = run.metrics.cv2_by_stop.front();
    s.nc_bunching_ratio.push_back(dispatch > 0.0 ? run.metrics.downstream_cv2() / dispatch
                                                 : std::numeric_limits<double>::infinity());
  }
  s.seconds = seconds_since(t0);
  return s;
}

std::vector<double> column(const std::vector<harness::MetricsRow>& rows, const std::string& policy,
                           double harness::MetricsRow::*field, const std::string& route = "") {
  std::vector<double> out;
  for (const auto& r : rows) {
    if (r.policy == policy && (route.empty() || r.route == route)) out.push_back(r.*field);
  }
  return out;
}

Verdict bunching(const DeskStudy& s) {
  int ok = 0;
  double lo = std::numeric_limits<double>::infinity();
  for (double r : s.nc_bunching_ratio) {
    ok += r >= kBunchingRatio;
    lo = std::min(lo, r);
  }
  return {ok >= kBunchingSeedsNeeded,
          format("downstream/dispatch CV2 >= %.0fx in %d/%zu eval seeds (need %d; min ratio %.1f)",
                 kBunchingRatio, ok, s.nc_bunching_ratio.size(), kBunchingSeedsNeeded, lo)};
}

Verdict fh_stabilizes(const DeskStudy& s) {
  const auto d = column(s.rows, "fh", &harness::MetricsRow::d_awt);
  const double ub = upper_bound(d, kConfidence);
  return {ub < 0.0, format("FH mean dAWT %.1f s, 95%% upper bound %.1f s over %zu seeds", mean(d), ub,
                           d.size())};
}

std::string label_of(const fs::path& checkpoint) { return checkpoint.stem().string(); }

Verdict caac_learns(const DeskStudy& s) {
  int ok = 0;
  std::string per;
  for (const auto& ck : s.caac_checkpoints) {
    const auto awt = column(s.rows, label_of(ck), &harness::MetricsRow::d_awt);
    const auto aod = column(s.rows, label_of(ck), &harness::MetricsRow::d_aod);
    const bool pass = upper_bound(awt, kConfidence) < 0.0 && upper_bound(aod, kConfidence) < 0.0;
    ok += pass;
    per += format(" [%s dAWT %.1f dAOD %.2f%s]", label_of(ck).c_str(), mean(awt), mean(aod),
                  pass ? "" : " x");
  }
  return {ok >= kLearnSeedsNeeded, format("%d/%zu seeds significant on both (need %d):%s", ok,
                                          s.caac_checkpoints.size(), kLearnSeedsNeeded, per.c_str())};
}

Verdict credit_assignment(const DeskStudy& s) {
  int ok = 0;
  std::string per;
  for (std::size_t k = 0; k < s.caac_checkpoints.size(); ++k) {
    const double caac = mean(column(s.rows, label_of(s.caac_checkpoints[k]), &harness::MetricsRow::d_awt));
    const double iac = mean(column(s.rows, label_of(s.iac_checkpoints[k]), &harness::MetricsRow::d_awt));
    ok += caac <= iac;
    per += format(" [seed %zu %.1f vs %.1f]", k, caac, iac);
  }
  return {ok >= kCreditSeedsNeeded,
          format("CAAC dAWT <= IAC dAWT in %d/%zu seeds (need %d, target %d):%s", ok,
                 s.caac_checkpoints.size(), kCreditSeedsNeeded, kCreditSeedsTarget, per.c_str())};
}

Verdict learning_trend(const DeskStudy& s) {
  int ok = 0;
  std::string per;
  for (const auto& path : s.caac_curves) {
    const auto curve = harness::read_curve(path);
    std::vector<double> ep, reward;
    for (const auto& r : curve) {
      ep.push_back(r.episode);
      reward.push_back(r.mean_reward);
    }
    const double rho = spearman(ep, reward);
    ok += rho > 0.0;
    per += format(" %.2f", rho);
  }
  return {ok >= kTrendSeedsNeeded, format("Spearman rho(reward, episode) > 0 in %d/%zu seeds (need %d):%s",
                                          ok, s.caac_curves.size(), kTrendSeedsNeeded, per.c_str())};
}

Verdict transfer(const fs::path& work) {
  fs::remove_all(work);
  auto c = harness::desk_scale_experiment();
  c.route = "R1s";
  c.policy = "caac";
  c.episodes = kTransferEpisodes;
  c.seeds = kTransferSeeds;
  c.out_dir = work;
  c.checkpoints = harness::cmd_train(c).checkpoints;
  c.transfer_routes = kTransferTargets;
  const auto rows = harness::cmd_transfer(c);
  bool pass = true;
  std::string per;
  for (const auto& route : kTransferTargets) {
    std::vector<double> d;
    for (const auto& ck : c.checkpoints) {
      const auto part = column(rows, label_of(ck), &harness::MetricsRow::d_awt, route);
      d.insert(d.end(), part.begin(), part.end());
    }
    const double ub = upper_bound(d, kConfidence);
    pass = pass && ub < 0.0;
    per += format(" [%s dAWT %.1f, ub %.1f, n %zu]", route.c_str(), mean(d), ub, d.size());
  }
  return {pass, "R1s-trained CAAC, 95% upper bound below 0 on every target:" + per};
}

std::set<std::string> parse_only(const std::string& spec) {
  std::set<std::string> out;
  std::size_t pos = 0;
  while (pos <= spec.size()) {
    const auto comma = spec.find(',', pos);
    const std::string item = spec.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
    const auto dash = item.find('-');
    if (dash != std::string::npos && dash > 0) {
      for (int k = std::stoi(item.substr(0, dash)); k <= std::stoi(item.substr(dash + 1)); ++k) {
        out.insert(std::to_string(k));
      }
    } else if (!item.empty()) {
      out.insert(item);
    }
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance gates"};
  std::string work = "acceptance_runs";
  std::string only;
  app.add_option("--work-dir", work, "scratch directory for training and evaluation output");
  app.add_option("--only", only, "comma list of gates, ranges allowed (e.g. 1-8,13); T is the learning trend");
  CLI11_PARSE(app, argc, argv);
  const auto selected = parse_only(only);
  auto wanted = [&](const std::string& id) { return selected.empty() || selected.count(id) > 0; };

  const auto start = std::chrono::steady_clock::now();
  int failures = 0;
  auto report = [&](const std::string& id, const std::string& name, const std::function<Verdict()>& gate) {
    if (!wanted(id)) return;
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = gate();
    } catch (const std::exception& e) {
      v = {false, std::string("error: ") + e.what()};
    }
    failures += !v.pass;
    std::printf("%s %2s %-28s %s (%.1f s)\n", v.pass ? "PASS" : "FAIL", id.c_str(), name.c_str(),
                v.detail.c_str(), seconds_since(t0));
    std::fflush(stdout);
  };

  const fs::path root = work;
  report("1", "gradient fidelity", gradient_fidelity);
  report("2", "attention normalization", attention_normalization);
  report("3", "event-graph oracle", oracle_equivalence);
  report("4", "reward arithmetic", reward_arithmetic);
  report("5", "IAC equivalence", iac_equivalence);
  report("6", "determinism", [&] { return determinism(root / "determinism"); });
  report("7", "Bellman degenerate case", bellman_degenerate);
  report("8", "conservation (R1s, NC)", conservation);

  std::optional<DeskStudy> study;
  std::optional<std::string> study_error;
  auto desk = [&]() -> const DeskStudy& {
    if (!study && !study_error) {
      try {
        study = run_desk_study(root / "desk");
        std::printf("     desk study: 5 CAAC + 5 IAC trainings and evaluation in %.0f s\n", study->seconds);
      } catch (const std::exception& e) {
        study_error = e.what();
      }
    }
    if (study_error) throw Error(*study_error);
    return *study;
  };
  report("9", "bunching under NC", [&] { return bunching(desk()); });
  report("10", "FH stabilizes", [&] { return fh_stabilizes(desk()); });
  report("11", "CAAC learns", [&] { return caac_learns(desk()); });
  report("12", "credit assignment", [&] { return credit_assignment(desk()); });
  report("13", "transfer", [&] { return transfer(root / "transfer"); });
  if (wanted("T")) {
    const auto t0 = std::chrono::steady_clock::now();
    try {
      const auto v = learning_trend(desk());
      std::printf("INFO  T %-28s %s %s (%.1f s)\n", "learning trend", v.pass ? "met" : "not met",
                  v.detail.c_str(), seconds_since(t0));
    } catch (const std::exception& e) {
      std::printf("INFO  T %-28s error: %s\n", "learning trend", e.what());
    }
  }
  std::printf("%d gate(s) failed, total %.0f s\n", failures, seconds_since(start));
  return failures == 0 ? 0 : 1;
}
