#include "caac/agent/agent.hpp"

#include <algorithm>

#include "caac/agent/checkpoint.hpp"
#include "caac/errors.hpp"

namespace caac::agent {

double select_action(const ActorNet& actor, const env::Observation& obs, double sigma,
                     std::mt19937_64& rng) {
  double a = actor.action(obs);
  if (sigma > 0.0) {
    std::normal_distribution<double> noise(0.0, sigma);
    a += noise(rng);
  }
  return std::clamp(a, 0.0, 1.0);
}

namespace {

constexpr std::size_t kCriticInput = env::kObservationSize + 1;

nn::Var state_action(nn::Tape& tape, const env::Observation& obs, nn::Var action) {
  const auto v = obs.values();
  return tape.concat(tape.constant(v), action);
}

nn::Var ego_node(nn::Tape& tape, const env::Observation& obs, nn::Var action) {
  const double pad[2] = {0.0, 0.0};
  return tape.concat(state_action(tape, obs, action), tape.constant(pad));
}

}  // namespace

CaacAgent::CaacAgent(CaacConfig config, EventCriticMode mode, std::uint64_t seed)
    : config_(std::move(config)),
      mode_(mode),
      rng_(seed),
      actor_(ActorNet::create(config_.sizes, rng_)),
      critic_(ValueNet::create("critic", kCriticInput, config_.sizes, rng_)),
      event_(EventCriticNet::create(config_.sizes, rng_)),
      target_actor_(actor_),
      target_critic_(critic_),
      target_event_(event_),
      actor_opt_(actor_.params, config_.actor_lr),
      critic_opt_(critic_.params, config_.critic_lr),
      event_opt_(event_.params, config_.critic_lr),
      critic_kernel_({&critic_.params, &event_.params}),
      actor_kernel_({&actor_.params}) {
  config_.validate();
}

void CaacAgent::zero_event_critic() {
  event_.params.fill(0.0);
  target_event_.params.fill(0.0);
}

double CaacAgent::target_value(const Transition& t) const {
  if (t.terminal) return t.reward;
  if (mode_ != EventCriticMode::disabled && !t.has_next_window) {
    throw DataError("critic_loss: non-terminal transition without its next-window neighbor sets");
  }
  nn::Tape tape;
  const auto next = t.next_obs.values();
  const nn::Var a = target_actor_.forward(tape, tape.constant(next));
  double future = tape.scalar(target_critic_.forward(tape, state_action(tape, t.next_obs, a)));
  if (mode_ != EventCriticMode::disabled) {
    const auto out = target_event_.forward(tape, ego_node(tape, t.next_obs, a), t.next_up,
                                           t.next_down);
    future = inductive_return(future, tape.scalar(out.value));
  }
  return t.reward + config_.gamma * future;
}

nn::Var CaacAgent::sample_critic_loss(nn::Tape& tape, const Transition& t, double y) const {
  const nn::Var action = tape.constant(t.action);
  nn::Var g = critic_.forward(tape, state_action(tape, t.obs, action));
  std::vector<nn::Var> terms;
  if (mode_ != EventCriticMode::disabled) {
    const auto out = event_.forward(tape, ego_node(tape, t.obs, action), t.up, t.down);
    g = tape.add(g, out.value);
    if (out.up.empty) terms.push_back(tape.scale(tape.squared_norm(out.up.summary), config_.beta));
    if (out.down.empty) {
      terms.push_back(tape.scale(tape.squared_norm(out.down.summary), config_.beta));
    }
  }
  nn::Var loss = tape.square(tape.sub(tape.constant(y), g));
  for (nn::Var p : terms) loss = tape.add(loss, p);
  return loss;
}

nn::Var CaacAgent::sample_actor_loss(nn::Tape& tape, const Transition& t) const {
  const auto v = t.obs.values();
  const nn::Var a = actor_.forward(tape, tape.constant(v));
  return tape.scale(critic_.forward(tape, state_action(tape, t.obs, a)), -1.0);
}

void CaacAgent::check_batch(Batch batch) const {
  if (batch.empty()) throw ArgumentError("training batch is empty");
}

double CaacAgent::critic_gradients(Batch batch, nn::Gradients& critic, nn::Gradients& event) {
  check_batch(batch);
  targets_.resize(batch.size());
  for (std::size_t i = 0; i < batch.size(); ++i) targets_[i] = target_value(*batch[i]);
  std::vector<nn::Gradients> grads;
  const double loss = critic_kernel_.run(
      batch.size(),
      [&](nn::Tape& tape, std::size_t i) { return sample_critic_loss(tape, *batch[i], targets_[i]); },
      grads, parallel_);
  critic = std::move(grads[0]);
  event = std::move(grads[1]);
  return loss;
}

double CaacAgent::actor_gradients(Batch batch, nn::Gradients& actor) {
  check_batch(batch);
  std::vector<nn::Gradients> grads;
  const double loss = actor_kernel_.run(
      batch.size(), [&](nn::Tape& tape, std::size_t i) { return sample_actor_loss(tape, *batch[i]); },
      grads, parallel_);
  actor = std::move(grads[0]);
  return -loss;
}

double CaacAgent::critic_loss(Batch batch) {
  check_batch(batch);
  double total = 0.0;
  nn::Tape tape;
  for (const Transition* t : batch) {
    const double y = target_value(*t);
    tape.clear();
    total += tape.scalar(sample_critic_loss(tape, *t, y));
  }
  return total / static_cast<double>(batch.size());
}

void CaacAgent::soft_update_targets() {
  nn::soft_update(target_actor_.params, actor_.params, config_.tau);
  nn::soft_update(target_critic_.params, critic_.params, config_.tau);
  if (mode_ == EventCriticMode::enabled) {
    nn::soft_update(target_event_.params, event_.params, config_.tau);
  }
}

TrainStats CaacAgent::update(Batch batch) {
  TrainStats stats;
  nn::Gradients critic_grad;
  nn::Gradients event_grad;
  stats.critic_loss = critic_gradients(batch, critic_grad, event_grad);
  nn::adam_step(critic_.params, critic_grad, critic_opt_);
  if (mode_ == EventCriticMode::enabled) nn::adam_step(event_.params, event_grad, event_opt_);

  nn::Gradients actor_grad;
  stats.actor_objective = actor_gradients(batch, actor_grad);
  nn::adam_step(actor_.params, actor_grad, actor_opt_);

  soft_update_targets();
  ++step_;
  return stats;
}

nlohmann::json CaacAgent::checkpoint() const {
  nlohmann::json nets = {
      {"actor", nn::to_json(actor_.params)},
      {"critic", nn::to_json(critic_.params)},
      {"target_actor", nn::to_json(target_actor_.params)},
      {"target_critic", nn::to_json(target_critic_.params)},
  };
  if (mode_ != EventCriticMode::disabled) {
    nets["event_critic"] = nn::to_json(event_.params);
    nets["target_event_critic"] = nn::to_json(target_event_.params);
  }
  nlohmann::json config = to_json(config_);
  config["frozen_event_critic"] = mode_ == EventCriticMode::frozen;
  return {{"format_version", kCheckpointFormatVersion},
          {"kind", kind()},
          {"config", config},
          {"step", step_},
          {"networks", nets}};
}

std::unique_ptr<CaacAgent> CaacAgent::from_checkpoint(const nlohmann::json& doc,
                                                      const std::string& expected) {
  check_checkpoint_header(doc, kCheckpointFormatVersion);
  if (expected != "caac" && expected != "iac") {
    throw ArgumentError("CaacAgent::from_checkpoint: unknown kind '" + expected + "'");
  }
  const bool with_event = expected == "caac";
  // A missing block is the more useful diagnostic, so check it before the kind.
  const nn::ParameterSet actor = checkpoint_block(doc, "actor");
  const nn::ParameterSet critic = checkpoint_block(doc, "critic");
  const nn::ParameterSet target_actor = checkpoint_block(doc, "target_actor");
  const nn::ParameterSet target_critic = checkpoint_block(doc, "target_critic");
  nn::ParameterSet event;
  nn::ParameterSet target_event;
  if (with_event) {
    event = checkpoint_block(doc, "event_critic");
    target_event = checkpoint_block(doc, "target_event_critic");
  }
  const std::string kind = doc["kind"].get<std::string>();
  if (kind != expected) {
    throw FormatError("checkpoint: field 'kind' is '" + kind + "', expected '" + expected + "'");
  }
  CaacConfig config;
  try {
    config = caac_config_from_json(doc["config"]);
  } catch (const ConfigError& e) {
    throw FormatError(std::string("checkpoint: field 'config': ") + e.what());
  }
  EventCriticMode mode = EventCriticMode::disabled;
  if (with_event) {
    mode = doc["config"].value("frozen_event_critic", false) ? EventCriticMode::frozen
                                                             : EventCriticMode::enabled;
  }
  auto agent = std::make_unique<CaacAgent>(config, mode, 0);
  assign_parameters(agent->actor_.params, actor, "actor");
  assign_parameters(agent->critic_.params, critic, "critic");
  assign_parameters(agent->target_actor_.params, target_actor, "target_actor");
  assign_parameters(agent->target_critic_.params, target_critic, "target_critic");
  if (with_event) {
    assign_parameters(agent->event_.params, event, "event_critic");
    assign_parameters(agent->target_event_.params, target_event, "target_event_critic");
  }
  if (!doc["step"].is_number_integer()) throw FormatError("checkpoint: field 'step' must be an integer");
  agent->step_ = doc["step"].get<std::int64_t>();
  return agent;
}

}  // namespace caac::agent
