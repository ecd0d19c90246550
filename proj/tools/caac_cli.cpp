// Command-line front end: caac train | eval | transfer | plot.

#include <cstdio>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "caac/errors.hpp"
#include "caac/harness/harness.hpp"
#include "caac/io/logs.hpp"

namespace {

using caac::harness::ExperimentConfig;

enum Exit : int {
  kOk = 0,
  kUnknown = 1,
  kConfig = 2,
  kArgument = 3,
  kProtocol = 4,
  kState = 5,
  kData = 6,
  kFormat = 7,
  kIo = 8,
};

std::vector<std::uint64_t> parse_seeds(const std::string& text) {
  std::vector<std::uint64_t> seeds;
  std::stringstream in(text);
  std::string part;
  while (std::getline(in, part, ',')) {
    if (part.empty()) continue;
    const auto dash = part.find('-');
    try {
      if (dash != std::string::npos && dash > 0) {
        const auto lo = std::stoull(part.substr(0, dash));
        const auto hi = std::stoull(part.substr(dash + 1));
        if (hi < lo) throw caac::ArgumentError("seed range '" + part + "' is reversed");
        for (auto s = lo; s <= hi; ++s) seeds.push_back(s);
      } else {
        seeds.push_back(std::stoull(part));
      }
    } catch (const std::logic_error&) {
      throw caac::ArgumentError("cannot parse seeds '" + text + "'");
    }
  }
  if (seeds.empty()) throw caac::ArgumentError("no seeds given");
  return seeds;
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream in(text);
  std::string part;
  while (std::getline(in, part, ',')) {
    if (!part.empty()) out.push_back(part);
  }
  return out;
}

struct Flags {
  std::string config;
  std::string route;
  std::string policy;
  int episodes = 0;
  std::string seeds;
  std::vector<std::string> checkpoints;
  std::string out;
  bool desk_scale = false;
};

void add_common(CLI::App* cmd, Flags& f) {
  cmd->add_option("--config", f.config, "experiment config file (JSON)");
  cmd->add_option("--route", f.route, "route preset (desk, R1s..R4s) or route config file");
  cmd->add_option("--policy", f.policy, "nc, fh, iac, maddpg or caac");
  cmd->add_option("--episodes", f.episodes, "training episodes");
  cmd->add_option("--seeds", f.seeds, "seed list, e.g. 0,1,2 or 1000-1009");
  cmd->add_option("--checkpoint", f.checkpoints, "checkpoint file (repeatable)");
  cmd->add_option("--out", f.out, "output directory (plot: output SVG path)");
  cmd->add_flag("--desk-scale", f.desk_scale, "desk-scale defaults: 20 stops, 8 buses, 50 episodes");
}

ExperimentConfig base_config(const Flags& f) {
  ExperimentConfig c = f.desk_scale ? caac::harness::desk_scale_experiment() : ExperimentConfig{};
  if (!f.config.empty()) c = caac::harness::load_experiment_file(f.config);
  if (f.episodes > 0) c.episodes = f.episodes;
  if (!f.out.empty()) c.out_dir = f.out;
  return c;
}

int run_train(const Flags& f) {
  ExperimentConfig c = base_config(f);
  if (!f.route.empty()) c.route = f.route;
  if (!f.policy.empty()) c.policy = f.policy;
  if (!f.seeds.empty()) c.seeds = parse_seeds(f.seeds);
  if (f.checkpoints.size() > 1) throw caac::ArgumentError("train resumes from one checkpoint");
  if (!f.checkpoints.empty()) c.resume = f.checkpoints.front();
  const auto summary = caac::harness::cmd_train(c);
  for (std::size_t i = 0; i < summary.checkpoints.size(); ++i) {
    std::cout << summary.checkpoints[i].string() << ' ' << summary.curves[i].string() << '\n';
  }
  return kOk;
}

void apply_eval_flags(const Flags& f, ExperimentConfig& c) {
  if (!f.seeds.empty()) c.eval_seeds = parse_seeds(f.seeds);
  if (!f.policy.empty()) {
    c.rule_policies.clear();
    for (const auto& p : split_list(f.policy)) {
      if (p == "nc" || p == "fh") {
        c.rule_policies.push_back(p);
      } else if (f.checkpoints.empty() && c.checkpoints.empty()) {
        throw caac::ArgumentError("policy '" + p + "' needs --checkpoint");
      }
    }
  }
  for (const auto& p : f.checkpoints) c.checkpoints.emplace_back(p);
}

void print_rows(const std::vector<caac::harness::MetricsRow>& rows) {
  for (const auto& r : rows) {
    std::printf("%-6s %-22s seed %-6llu AWT %8.2f dAWT %8.2f AOD %7.3f dAOD %7.3f AHT %6.2f\n",
                r.route.c_str(), r.policy.c_str(), static_cast<unsigned long long>(r.seed), r.awt,
                r.d_awt, r.aod, r.d_aod, r.aht);
  }
}

int run_eval(const Flags& f) {
  ExperimentConfig c = base_config(f);
  if (!f.route.empty()) c.route = f.route;
  apply_eval_flags(f, c);
  print_rows(caac::harness::cmd_eval(c));
  return kOk;
}

int run_transfer(const Flags& f) {
  ExperimentConfig c = base_config(f);
  if (!f.route.empty()) c.transfer_routes = split_list(f.route);
  apply_eval_flags(f, c);
  print_rows(caac::harness::cmd_transfer(c));
  return kOk;
}

int run_plot(const Flags& f) {
  ExperimentConfig c = base_config(f);
  if (!f.route.empty()) c.route = f.route;
  const auto route = caac::sim::resolve_route(c.route);
  caac::harness::PolicyHandle policy = caac::harness::rule_policy("nc");
  if (!f.checkpoints.empty()) {
    std::shared_ptr<const caac::agent::Learner> learner =
        caac::harness::load_checkpoint(f.checkpoints.front());
    policy = caac::harness::learned_policy(learner, learner->kind());
  } else if (!f.policy.empty()) {
    policy = caac::harness::rule_policy(f.policy);
  }
  const std::uint64_t seed = f.seeds.empty() ? c.eval_seeds.front() : parse_seeds(f.seeds).front();
  std::filesystem::path out = f.out.empty() ? std::string("trajectory.svg") : f.out;
  const auto run = caac::harness::run_episode(c, route, policy, seed);
  caac::harness::emit_trajectory_svg(run.result.sim.event_log(), route.config, out);
  auto events_path = out;
  events_path.replace_extension(".events.csv");
  caac::io::write_event_log(events_path, run.result.sim.event_log());
  std::cout << out.string() << ' ' << events_path.string() << '\n';
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Asynchronous holding control laboratory"};
  app.require_subcommand(1);
  Flags flags;
  auto* train = app.add_subcommand("train", "train a learning policy, one checkpoint per seed");
  auto* eval = app.add_subcommand("eval", "evaluate policies against NC on one route");
  auto* transfer = app.add_subcommand("transfer", "evaluate checkpoints on other routes");
  auto* plot = app.add_subcommand("plot", "time-distance SVG of one episode");
  for (auto* cmd : {train, eval, transfer, plot}) add_common(cmd, flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kArgument;
  }

  try {
    if (train->parsed()) return run_train(flags);
    if (eval->parsed()) return run_eval(flags);
    if (transfer->parsed()) return run_transfer(flags);
    if (plot->parsed()) return run_plot(flags);
  } catch (const caac::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const caac::ArgumentError& e) {
    std::cerr << "argument error: " << e.what() << '\n';
    return kArgument;
  } catch (const caac::ProtocolError& e) {
    std::cerr << "protocol error: " << e.what() << '\n';
    return kProtocol;
  } catch (const caac::StateError& e) {
    std::cerr << "state error: " << e.what() << '\n';
    return kState;
  } catch (const caac::DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kData;
  } catch (const caac::FormatError& e) {
    std::cerr << "format error: " << e.what() << '\n';
    return kFormat;
  } catch (const caac::IoError& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return kIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUnknown;
  }
  return kUnknown;
}
