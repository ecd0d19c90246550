#include "caac/baselines/baselines.hpp"

#include <algorithm>

#include "caac/agent/checkpoint.hpp"
#include "caac/errors.hpp"

namespace caac::baselines {

void FhParams::validate() const {
  if (!(target_headway > 0.0)) throw ConfigError("fh: H0 must be > 0");
  if (!(mean_delay >= 0.0)) throw ConfigError("fh: d_bar must be >= 0");
  if (!(gain > 0.0)) throw ConfigError("fh: gain must be > 0");
}

FhParams default_fh_params(double dispatch_mean) {
  FhParams p;
  p.target_headway = dispatch_mean;
  return p;
}

double fh_hold(double h_minus, const FhParams& p, double max_hold) {
  if (!(h_minus >= 0.0)) throw ArgumentError("fh_hold: headway must be >= 0");
  const double d = std::max(0.0, p.mean_delay + p.gain * (p.target_headway - h_minus));
  return std::min(d, max_hold);
}

env::Policy nc_policy() {
  return [](const env::Decision&) { return 0.0; };
}

env::Policy fh_policy(const FhParams& p, double dispatch_mean, double max_hold) {
  p.validate();
  return [p, dispatch_mean, max_hold](const env::Decision& d) {
    if (max_hold <= 0.0) return 0.0;
    const double hold = fh_hold(d.obs.forward * dispatch_mean, p, max_hold);
    return std::min(1.0, hold / max_hold);
  };
}

JointFeature maddpg_joint(std::span<const double> joint_obs, int slot, double action, int slots) {
  const auto n = static_cast<std::size_t>(slots);
  if (joint_obs.size() != n * env::kObservationSize) {
    throw ArgumentError("maddpg_joint: joint observation has the wrong length");
  }
  JointFeature f;
  f.observations.assign(joint_obs.begin(), joint_obs.end());
  f.actions.assign(n, 0.0);
  if (slot >= 0 && slot < slots) f.actions[static_cast<std::size_t>(slot)] = action;
  return f;
}

namespace {

std::size_t joint_width(int slots) {
  return static_cast<std::size_t>(slots) * (env::kObservationSize + 1);
}

}  // namespace

MaddpgAgent::MaddpgAgent(agent::CaacConfig config, int slots, std::uint64_t seed)
    : config_(std::move(config)),
      slots_(slots),
      rng_(seed),
      actor_(agent::ActorNet::create(config_.sizes, rng_)),
      critic_(agent::ValueNet::create("joint_critic", joint_width(slots), config_.sizes, rng_)),
      target_actor_(actor_),
      target_critic_(critic_),
      actor_opt_(actor_.params, config_.actor_lr),
      critic_opt_(critic_.params, config_.critic_lr),
      critic_kernel_({&critic_.params}),
      actor_kernel_({&actor_.params}) {
  if (slots < 1) throw ConfigError("maddpg: slots must be >= 1");
  config_.validate();
}

nn::Var MaddpgAgent::joint_input(nn::Tape& tape, std::span<const double> joint_obs, int slot,
                                 nn::Var action) const {
  if (joint_obs.size() != static_cast<std::size_t>(slots_) * env::kObservationSize) {
    throw DataError("maddpg: transition lacks a joint observation of " +
                    std::to_string(slots_) + " slots");
  }
  if (slot < 0 || slot >= slots_) throw DataError("maddpg: deciding bus has no joint slot");
  nn::Var x = tape.constant(joint_obs);
  const std::vector<double> zeros(static_cast<std::size_t>(slots_), 0.0);
  const auto before = static_cast<std::size_t>(slot);
  const auto after = static_cast<std::size_t>(slots_ - slot - 1);
  if (before > 0) x = tape.concat(x, tape.constant(std::span(zeros.data(), before)));
  x = tape.concat(x, action);
  if (after > 0) x = tape.concat(x, tape.constant(std::span(zeros.data(), after)));
  return x;
}

double MaddpgAgent::target_value(const agent::Transition& t) const {
  if (t.terminal) return t.reward;
  nn::Tape tape;
  const auto next = t.next_obs.values();
  const nn::Var a = target_actor_.forward(tape, tape.constant(next));
  const double q = tape.scalar(
      target_critic_.forward(tape, joint_input(tape, t.next_joint_obs, t.next_joint_slot, a)));
  return t.reward + config_.gamma * q;
}

agent::TrainStats MaddpgAgent::update(agent::Batch batch) {
  if (batch.empty()) throw ArgumentError("training batch is empty");
  agent::TrainStats stats;
  targets_.resize(batch.size());
  for (std::size_t i = 0; i < batch.size(); ++i) targets_[i] = target_value(*batch[i]);
  std::vector<nn::Gradients> grads;
  stats.critic_loss = critic_kernel_.run(
      batch.size(),
      [&](nn::Tape& tape, std::size_t i) {
        const agent::Transition& t = *batch[i];
        const nn::Var q = critic_.forward(
            tape, joint_input(tape, t.joint_obs, t.joint_slot, tape.constant(t.action)));
        return tape.square(tape.sub(tape.constant(targets_[i]), q));
      },
      grads, parallel_);
  nn::adam_step(critic_.params, grads[0], critic_opt_);

  const double loss = actor_kernel_.run(
      batch.size(),
      [&](nn::Tape& tape, std::size_t i) {
        const agent::Transition& t = *batch[i];
        const auto obs = t.obs.values();
        const nn::Var a = actor_.forward(tape, tape.constant(obs));
        return tape.scale(critic_.forward(tape, joint_input(tape, t.joint_obs, t.joint_slot, a)),
                          -1.0);
      },
      grads, parallel_);
  stats.actor_objective = -loss;
  nn::adam_step(actor_.params, grads[0], actor_opt_);

  nn::soft_update(target_actor_.params, actor_.params, config_.tau);
  nn::soft_update(target_critic_.params, critic_.params, config_.tau);
  ++step_;
  return stats;
}

nlohmann::json MaddpgAgent::checkpoint() const {
  nlohmann::json config = agent::to_json(config_);
  config["slots"] = slots_;
  return {{"format_version", agent::kCheckpointFormatVersion},
          {"kind", kind()},
          {"config", config},
          {"step", step_},
          {"networks",
           {{"actor", nn::to_json(actor_.params)},
            {"joint_critic", nn::to_json(critic_.params)},
            {"target_actor", nn::to_json(target_actor_.params)},
            {"target_joint_critic", nn::to_json(target_critic_.params)}}}};
}

std::unique_ptr<MaddpgAgent> MaddpgAgent::from_checkpoint(const nlohmann::json& doc) {
  agent::check_checkpoint_header(doc, agent::kCheckpointFormatVersion);
  const auto actor = agent::checkpoint_block(doc, "actor");
  const auto critic = agent::checkpoint_block(doc, "joint_critic");
  const auto target_actor = agent::checkpoint_block(doc, "target_actor");
  const auto target_critic = agent::checkpoint_block(doc, "target_joint_critic");
  if (doc["kind"] != "maddpg") {
    throw FormatError("checkpoint: field 'kind' is " + doc["kind"].dump() + ", expected 'maddpg'");
  }
  agent::CaacConfig config;
  int slots = 0;
  try {
    config = agent::caac_config_from_json(doc["config"]);
    slots = doc["config"].at("slots").get<int>();
  } catch (const std::exception& e) {
    throw FormatError(std::string("checkpoint: field 'config': ") + e.what());
  }
  auto out = std::make_unique<MaddpgAgent>(config, slots, 0);
  agent::assign_parameters(out->actor_.params, actor, "actor");
  agent::assign_parameters(out->critic_.params, critic, "joint_critic");
  agent::assign_parameters(out->target_actor_.params, target_actor, "target_actor");
  agent::assign_parameters(out->target_critic_.params, target_critic, "target_joint_critic");
  out->step_ = doc["step"].get<std::int64_t>();
  return out;
}

std::unique_ptr<agent::CaacAgent> iac_factory(const agent::CaacConfig& config,
                                              std::uint64_t seed) {
  return std::make_unique<agent::CaacAgent>(config, agent::EventCriticMode::disabled, seed);
}

}  // namespace caac::baselines
