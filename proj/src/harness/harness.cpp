#include "caac/harness/harness.hpp"

#include <omp.h>

#include <algorithm>
#include <exception>
#include <fstream>
#include <random>

#include "caac/agent/checkpoint.hpp"
#include "caac/errors.hpp"
#include "caac/io/csv.hpp"
#include "caac/io/logs.hpp"

namespace caac::harness {

namespace {

std::mt19937_64 derived_rng(std::uint64_t seed, std::uint32_t a, std::uint32_t b = 0) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed & 0xffffffffu),
                    static_cast<std::uint32_t>(seed >> 32), a, b};
  return std::mt19937_64(seq);
}

constexpr std::uint32_t kTrainTag = 0x74726e;
constexpr std::uint32_t kEvalTag = 0x65766c;

// Runs `body(i)` for i in [0, n), in parallel when asked; rethrows the first failure.
template <class Body>
void for_each_index(std::size_t n, bool parallel, Body body) {
  std::vector<std::exception_ptr> errors(n);
  const auto count = static_cast<long>(n);
#pragma omp parallel for schedule(dynamic) if (parallel)
  for (long i = 0; i < count; ++i) {
    try {
      body(static_cast<std::size_t>(i));
    } catch (...) {
      errors[static_cast<std::size_t>(i)] = std::current_exception();
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace

void ExperimentConfig::validate() const {
  if (episodes < 1) throw ConfigError("episodes must be >= 1");
  if (seeds.empty()) throw ConfigError("seeds must not be empty");
  if (eval_seeds.empty()) throw ConfigError("eval_seeds must not be empty");
  if (!(demand_scale_min > 0.0) || !(demand_scale_max >= demand_scale_min)) {
    throw ConfigError("demand_scale must satisfy 0 < min <= max");
  }
  if (train_horizon && !(*train_horizon > 0.0)) throw ConfigError("train_horizon_s must be > 0");
  if (checkpoint_every < 1) throw ConfigError("checkpoint_every must be >= 1");
  const auto names = policy_names();
  if (std::find(names.begin(), names.end(), policy) == names.end()) {
    throw ConfigError("unknown policy '" + policy + "'");
  }
  for (const auto& p : rule_policies) {
    if (p != "nc" && p != "fh") throw ConfigError("rule_policies accepts nc and fh, got '" + p + "'");
  }
  agent.validate();
  baselines::FhParams{1.0, fh_mean_delay, fh_gain}.validate();
}

ExperimentConfig experiment_from_json(const nlohmann::json& doc) {
  if (!doc.is_object()) throw ConfigError("experiment config: expected an object");
  ExperimentConfig c;
  try {
    c.route = doc.value("route", c.route);
    c.transfer_routes = doc.value("transfer_routes", c.transfer_routes);
    c.policy = doc.value("policy", c.policy);
    c.rule_policies = doc.value("rule_policies", c.rule_policies);
    c.episodes = doc.value("episodes", c.episodes);
    c.seeds = doc.value("seeds", c.seeds);
    c.eval_seeds = doc.value("eval_seeds", c.eval_seeds);
    if (doc.contains("demand_scale")) {
      const auto range = doc.at("demand_scale").get<std::vector<double>>();
      if (range.size() != 2) throw ConfigError("demand_scale must be [min, max]");
      c.demand_scale_min = range[0];
      c.demand_scale_max = range[1];
    }
    if (doc.contains("train_horizon_s")) c.train_horizon = doc.at("train_horizon_s").get<double>();
    c.out_dir = doc.value("out", c.out_dir.string());
    if (doc.contains("resume")) c.resume = doc.at("resume").get<std::string>();
    for (const auto& p : doc.value("checkpoints", std::vector<std::string>{})) {
      c.checkpoints.emplace_back(p);
    }
    c.checkpoint_every = doc.value("checkpoint_every", c.checkpoint_every);
    c.parallel = doc.value("parallel", c.parallel);
    if (doc.contains("agent")) c.agent = agent::caac_config_from_json(doc.at("agent"));
    c.fh_mean_delay = doc.value("fh_mean_delay_s", c.fh_mean_delay);
    c.fh_gain = doc.value("fh_gain", c.fh_gain);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("experiment config: ") + e.what());
  }
  c.validate();
  return c;
}

ExperimentConfig load_experiment_file(const std::filesystem::path& path) {
  nlohmann::json doc;
  try {
    doc = read_json_file(path);
  } catch (const FormatError& e) {
    throw ConfigError(e.what());
  } catch (const IoError& e) {
    throw ConfigError(e.what());
  }
  return experiment_from_json(doc);
}

ExperimentConfig desk_scale_experiment() {
  ExperimentConfig c;
  c.route = "desk";
  c.episodes = 50;
  c.seeds = {0, 1, 2, 3, 4};
  c.eval_seeds.clear();
  for (std::uint64_t s = 1000; s < 1010; ++s) c.eval_seeds.push_back(s);
  return c;
}

std::vector<std::string> policy_names() { return {"nc", "fh", "iac", "maddpg", "caac"}; }

bool is_learning_policy(const std::string& policy) {
  return policy == "caac" || policy == "iac" || policy == "maddpg";
}

std::unique_ptr<agent::Learner> make_learner(const std::string& kind,
                                             const agent::CaacConfig& config, int slots,
                                             std::uint64_t seed) {
  if (kind == "caac") {
    return std::make_unique<agent::CaacAgent>(config, agent::EventCriticMode::enabled, seed);
  }
  if (kind == "iac") return baselines::iac_factory(config, seed);
  if (kind == "maddpg") return std::make_unique<baselines::MaddpgAgent>(config, slots, seed);
  throw ConfigError("policy '" + kind + "' is not a learning policy");
}

nlohmann::json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read '" + path.string() + "'");
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("'" + path.string() + "' is not valid JSON: " + e.what());
  }
}

void write_json_file(const std::filesystem::path& path, const nlohmann::json& doc) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << doc.dump(1) << '\n';
  if (!out) throw IoError("error writing '" + path.string() + "'");
}

void save_checkpoint(const std::filesystem::path& path, const agent::Learner& learner,
                     int episodes_done) {
  nlohmann::json doc = learner.checkpoint();
  doc["episodes_done"] = episodes_done;
  write_json_file(path, doc);
}

std::unique_ptr<agent::Learner> load_learner(const nlohmann::json& doc) {
  agent::check_checkpoint_header(doc, agent::kCheckpointFormatVersion);
  const std::string kind = doc["kind"].get<std::string>();
  if (kind == "caac" || kind == "iac") return agent::CaacAgent::from_checkpoint(doc, kind);
  if (kind == "maddpg") return baselines::MaddpgAgent::from_checkpoint(doc);
  throw FormatError("checkpoint: unknown 'kind' '" + kind + "'");
}

std::unique_ptr<agent::Learner> load_checkpoint(const std::filesystem::path& path) {
  return load_learner(read_json_file(path));
}

TrainOutcome train_seed(const ExperimentConfig& config, const sim::RouteSpec& route,
                        const std::string& policy, std::uint64_t seed,
                        const nlohmann::json* resume,
                        const std::filesystem::path* checkpoint_path) {
  if (!is_learning_policy(policy)) throw ConfigError("policy '" + policy + "' is not trainable");
  sim::RouteConfig train_route = route.config;
  if (config.train_horizon) train_route.horizon = *config.train_horizon;

  TrainOutcome out;
  if (resume != nullptr) {
    out.learner = load_learner(*resume);
    if (out.learner->kind() != policy) {
      throw ConfigError("resume checkpoint is '" + out.learner->kind() + "', not '" + policy + "'");
    }
    out.episodes_done = resume->value("episodes_done", 0);
  } else {
    out.learner = make_learner(policy, config.agent, route.config.n_services, seed);
  }
  agent::Learner& learner = *out.learner;
  learner.set_parallel(config.parallel);
  const agent::CaacConfig& ac = learner.config();
  agent::ReplayBuffer buffer(ac.buffer_capacity);
  const std::size_t ready = std::max(ac.warmup, ac.batch_size);

  for (int e = out.episodes_done; e < config.episodes; ++e) {
    auto rng = derived_rng(seed, kTrainTag, static_cast<std::uint32_t>(e));
    std::uniform_real_distribution<double> scale_dist(config.demand_scale_min,
                                                      config.demand_scale_max);
    const double scale = scale_dist(rng);
    const std::uint64_t sim_seed = rng();
    env::EnvOptions opts;
    opts.reward = {ac.w, ac.gamma};
    opts.joint_slots = learner.joint_slots();
    env::HoldingEnv env(
        sim::Simulation::build(train_route, route.demand.scaled(scale), sim_seed), opts);
    agent::TransitionAssembler assembler(ac.bus_gap_clip);
    const double progress =
        config.episodes > 1 ? static_cast<double>(e) / (config.episodes - 1) : 1.0;
    const double sigma = agent::exploration_sigma(ac, progress);

    double critic_loss = 0.0;
    double actor_objective = 0.0;
    std::size_t updates = 0;
    while (env.next()) {
      assembler.poll(env, buffer);
      env.act(learner.act(env.current().obs, sigma, rng));
      if (buffer.size() < ready) continue;
      for (std::size_t u = 0; u < ac.updates_per_decision; ++u) {
        const auto stats = learner.train_step(buffer, rng);
        critic_loss += stats.critic_loss;
        actor_objective += stats.actor_objective;
        ++updates;
      }
    }
    assembler.flush(env, buffer);

    std::vector<env::Decision> finalized;
    double reward = 0.0;
    for (const auto& d : env.decisions()) {
      if (!d.finalized()) continue;
      reward += *d.reward;
      finalized.push_back(d);
    }
    const auto& sim = env.simulation();
    const auto m = metrics::compute_metrics(sim.event_log(), sim.passengers(), finalized,
                                            sim.config());
    CurveRow row;
    row.episode = e;
    row.demand_scale = scale;
    row.mean_reward = finalized.empty() ? 0.0 : reward / static_cast<double>(finalized.size());
    row.awt = m.awt;
    row.aod = m.aod;
    row.critic_loss = updates > 0 ? critic_loss / static_cast<double>(updates) : 0.0;
    row.actor_loss = updates > 0 ? -actor_objective / static_cast<double>(updates) : 0.0;
    out.curve.push_back(row);
    out.episodes_done = e + 1;
    if (checkpoint_path != nullptr &&
        (out.episodes_done % config.checkpoint_every == 0 || out.episodes_done == config.episodes)) {
      save_checkpoint(*checkpoint_path, learner, out.episodes_done);
    }
  }
  return out;
}

namespace {

const std::vector<std::string> kCurveHeader = {"episode", "demand_scale", "mean_reward", "awt",
                                               "aod",     "critic_loss",  "actor_loss"};
const std::vector<std::string> kMetricsHeader = {
    "route", "policy", "seed",  "demand_scale", "aht",   "awt",   "ajt",  "att",
    "aod",   "d_aht",  "d_awt", "d_ajt",        "d_att", "d_aod", "note"};

std::filesystem::path ensure_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir)) {
    throw IoError("cannot create output directory '" + dir.string() + "'");
  }
  return dir;
}

}  // namespace

void write_curve(const std::filesystem::path& path, const std::vector<CurveRow>& rows) {
  io::CsvWriter out(path, kCurveHeader);
  for (const auto& r : rows) {
    out.cell(r.episode).cell(r.demand_scale).cell(r.mean_reward).cell(r.awt).cell(r.aod);
    out.cell(r.critic_loss).cell(r.actor_loss);
    out.end_row();
  }
  out.close();
}

std::vector<CurveRow> read_curve(const std::filesystem::path& path) {
  const auto table = io::read_csv(path, kCurveHeader);
  std::vector<CurveRow> rows;
  for (const auto& r : table.rows) {
    CurveRow c;
    c.episode = static_cast<int>(io::parse_int(r[0], "episode"));
    c.demand_scale = io::parse_double(r[1], "demand_scale");
    c.mean_reward = io::parse_double(r[2], "mean_reward");
    c.awt = io::parse_double(r[3], "awt");
    c.aod = io::parse_double(r[4], "aod");
    c.critic_loss = io::parse_double(r[5], "critic_loss");
    c.actor_loss = io::parse_double(r[6], "actor_loss");
    rows.push_back(c);
  }
  return rows;
}

TrainSummary cmd_train(const ExperimentConfig& config) {
  config.validate();
  const auto route = sim::resolve_route(config.route);
  const auto dir = ensure_dir(config.out_dir);
  std::optional<nlohmann::json> resume;
  if (config.resume) resume = read_json_file(*config.resume);

  TrainSummary summary;
  for (auto seed : config.seeds) {
    const std::string stem = config.policy + "_seed" + std::to_string(seed);
    summary.checkpoints.push_back(dir / (stem + ".json"));
    summary.curves.push_back(dir / (stem + "_curve.csv"));
  }
  for_each_index(config.seeds.size(), config.parallel, [&](std::size_t i) {
    const auto outcome = train_seed(config, route, config.policy, config.seeds[i],
                                    resume ? &*resume : nullptr, &summary.checkpoints[i]);
    write_curve(summary.curves[i], outcome.curve);
    if (outcome.curve.empty()) save_checkpoint(summary.checkpoints[i], *outcome.learner,
                                               outcome.episodes_done);
  });
  return summary;
}

PolicyHandle rule_policy(const std::string& name) {
  if (name != "nc" && name != "fh") throw ConfigError("'" + name + "' is not a rule policy");
  return {name, name, nullptr};
}

PolicyHandle learned_policy(std::shared_ptr<const agent::Learner> learner, std::string label) {
  PolicyHandle h;
  h.name = learner->kind();
  h.label = std::move(label);
  h.learner = std::move(learner);
  return h;
}

double eval_demand_scale(const ExperimentConfig& config, std::uint64_t seed) {
  auto rng = derived_rng(seed, kEvalTag);
  std::uniform_real_distribution<double> dist(config.demand_scale_min, config.demand_scale_max);
  return dist(rng);
}

EpisodeRun run_episode(const ExperimentConfig& config, const sim::RouteSpec& route,
                       const PolicyHandle& policy, std::uint64_t seed) {
  const double scale = eval_demand_scale(config, seed);
  auto sim = sim::Simulation::build(route.config, route.demand.scaled(scale), seed);
  env::EnvOptions opts;
  opts.reward.w = config.agent.w;
  opts.reward.gamma = config.agent.gamma;
  env::Policy fn;
  if (policy.learner) {
    const agent::Learner* learner = policy.learner.get();
    fn = [learner](const env::Decision& d) { return learner->actor().action(d.obs); };
  } else if (policy.name == "nc") {
    fn = baselines::nc_policy();
  } else if (policy.name == "fh") {
    baselines::FhParams p{route.config.dispatch_mean, config.fh_mean_delay, config.fh_gain};
    fn = baselines::fh_policy(p, route.config.dispatch_mean, route.config.max_hold);
  } else {
    throw ConfigError("policy '" + policy.name + "' needs a checkpoint");
  }
  auto result = env::rollout_episode(std::move(sim), fn, opts);
  const auto& s = result.sim;
  auto m = metrics::compute_metrics(s.event_log(), s.passengers(), result.decisions, s.config());
  return {std::move(result), std::move(m), scale};
}

std::vector<MetricsRow> evaluate_route(const ExperimentConfig& config, const sim::RouteSpec& route,
                                       const std::vector<PolicyHandle>& policies,
                                       const std::vector<std::uint64_t>& seeds,
                                       const std::optional<std::filesystem::path>& log_dir) {
  std::vector<PolicyHandle> all;
  all.push_back(rule_policy("nc"));
  for (const auto& p : policies) {
    if (p.label != "nc") all.push_back(p);
  }
  if (log_dir) ensure_dir(*log_dir);
  std::vector<std::vector<MetricsRow>> per_seed(seeds.size());
  for_each_index(seeds.size(), config.parallel, [&](std::size_t i) {
    const std::uint64_t seed = seeds[i];
    std::optional<metrics::EpisodeMetrics> nc;
    for (const auto& p : all) {
      const auto run = run_episode(config, route, p, seed);
      const auto& m = run.metrics;
      if (!nc) nc = m;
      MetricsRow row;
      row.route = route.name;
      row.policy = p.label;
      row.seed = seed;
      row.demand_scale = run.demand_scale;
      row.aht = m.aht;
      row.awt = m.awt;
      row.ajt = m.ajt;
      row.att = m.att;
      row.aod = m.aod;
      row.d_aht = m.aht - nc->aht;
      row.d_awt = m.awt - nc->awt;
      row.d_ajt = m.ajt - nc->ajt;
      row.d_att = m.att - nc->att;
      row.d_aod = m.aod - nc->aod;
      if (p.name == "maddpg" && p.learner->joint_slots() != route.config.n_services) {
        row.note = "fleet " + std::to_string(route.config.n_services) + " vs " +
                   std::to_string(p.learner->joint_slots()) +
                   " critic slots (actor is local; critic unused at evaluation)";
      }
      per_seed[i].push_back(row);
      if (log_dir) {
        const std::string stem =
            route.name + "_" + p.label + "_seed" + std::to_string(seed);
        const auto& s = run.result.sim;
        io::write_event_log(*log_dir / (stem + "_events.csv"), s.event_log());
        io::write_passenger_log(*log_dir / (stem + "_passengers.csv"), s.passengers());
        env::write_decision_trace(*log_dir / (stem + "_trace.csv"), run.result.decisions);
      }
    }
  });
  std::vector<MetricsRow> rows;
  for (auto& v : per_seed) rows.insert(rows.end(), v.begin(), v.end());
  return rows;
}

void write_metrics(const std::filesystem::path& path, const std::vector<MetricsRow>& rows) {
  io::CsvWriter out(path, kMetricsHeader);
  for (const auto& r : rows) {
    out.cell(r.route).cell(r.policy).cell(static_cast<long>(r.seed)).cell(r.demand_scale);
    out.cell(r.aht).cell(r.awt).cell(r.ajt).cell(r.att).cell(r.aod);
    out.cell(r.d_aht).cell(r.d_awt).cell(r.d_ajt).cell(r.d_att).cell(r.d_aod);
    out.cell(r.note);
    out.end_row();
  }
  out.close();
}

std::vector<MetricsRow> read_metrics(const std::filesystem::path& path) {
  const auto table = io::read_csv(path, kMetricsHeader);
  std::vector<MetricsRow> rows;
  for (const auto& r : table.rows) {
    MetricsRow m;
    m.route = r[0];
    m.policy = r[1];
    m.seed = static_cast<std::uint64_t>(io::parse_int(r[2], "seed"));
    m.demand_scale = io::parse_double(r[3], "demand_scale");
    m.aht = io::parse_double(r[4], "aht");
    m.awt = io::parse_double(r[5], "awt");
    m.ajt = io::parse_double(r[6], "ajt");
    m.att = io::parse_double(r[7], "att");
    m.aod = io::parse_double(r[8], "aod");
    m.d_aht = io::parse_double(r[9], "d_aht");
    m.d_awt = io::parse_double(r[10], "d_awt");
    m.d_ajt = io::parse_double(r[11], "d_ajt");
    m.d_att = io::parse_double(r[12], "d_att");
    m.d_aod = io::parse_double(r[13], "d_aod");
    m.note = r[14];
    rows.push_back(m);
  }
  return rows;
}

std::vector<PolicyHandle> evaluation_policies(const ExperimentConfig& config) {
  std::vector<PolicyHandle> out;
  for (const auto& p : config.rule_policies) out.push_back(rule_policy(p));
  for (const auto& path : config.checkpoints) {
    std::shared_ptr<const agent::Learner> learner = load_checkpoint(path);
    out.push_back(learned_policy(learner, path.stem().string()));
  }
  return out;
}

std::vector<MetricsRow> cmd_eval(const ExperimentConfig& config) {
  config.validate();
  const auto route = sim::resolve_route(config.route);
  const auto dir = ensure_dir(config.out_dir);
  const auto rows = evaluate_route(config, route, evaluation_policies(config), config.eval_seeds);
  write_metrics(dir / "metrics.csv", rows);
  return rows;
}

std::vector<MetricsRow> cmd_transfer(const ExperimentConfig& config) {
  config.validate();
  if (config.transfer_routes.empty()) throw ConfigError("transfer needs at least one target route");
  const auto dir = ensure_dir(config.out_dir);
  const auto policies = evaluation_policies(config);
  std::vector<MetricsRow> rows;
  for (const auto& name : config.transfer_routes) {
    const auto route = sim::resolve_route(name);
    auto part = evaluate_route(config, route, policies, config.eval_seeds);
    rows.insert(rows.end(), part.begin(), part.end());
  }
  write_metrics(dir / "transfer.csv", rows);
  return rows;
}

}  // namespace caac::harness
