#pragma once

#include <cstdint>
#include <memory>
#include <random>
#include <span>
#include <string>

#include <nlohmann/json.hpp>

#include "caac/agent/batch_kernel.hpp"
#include "caac/agent/config.hpp"
#include "caac/agent/networks.hpp"
#include "caac/agent/replay.hpp"
#include "caac/nn/adam.hpp"

namespace caac::agent {

/// a = clamp(actor(obs) + Normal(0, sigma), 0, 1). No draw is made when sigma = 0.
double select_action(const ActorNet& actor, const env::Observation& obs, double sigma,
                     std::mt19937_64& rng);

struct TrainStats {
  double critic_loss = 0.0;
  double actor_objective = 0.0;  // mean Q(s, actor(s)) before the actor step
};

using Batch = std::span<const Transition* const>;

/// What the training and evaluation loops need from any learning policy.
class Learner {
 public:
  Learner() = default;
  Learner(const Learner&) = delete;
  Learner& operator=(const Learner&) = delete;
  virtual ~Learner() = default;

  virtual std::string kind() const = 0;
  virtual const CaacConfig& config() const = 0;
  virtual const ActorNet& actor() const = 0;
  /// Slots of the joint observation the environment must record (0 = none).
  virtual int joint_slots() const { return 0; }
  virtual TrainStats update(Batch batch) = 0;
  virtual nlohmann::json checkpoint() const = 0;
  virtual void set_parallel(bool parallel) = 0;

  double act(const env::Observation& obs, double sigma, std::mt19937_64& rng) const {
    return select_action(actor(), obs, sigma, rng);
  }
  TrainStats train_step(const ReplayBuffer& buffer, std::mt19937_64& rng) {
    const auto batch = buffer.sample(config().batch_size, rng);
    return update(batch);
  }
};

/// How the event critic takes part in training.
///   enabled:  trained jointly with the ego critic (CAAC).
///   frozen:   evaluated but never updated.
///   disabled: U = 0, no penalty; its parameters are still created so that
///             random streams line up with the enabled agent (IAC).
enum class EventCriticMode { enabled, frozen, disabled };

inline constexpr int kCheckpointFormatVersion = 1;

class CaacAgent final : public Learner {
 public:
  CaacAgent(CaacConfig config, EventCriticMode mode, std::uint64_t seed);

  std::string kind() const override { return mode_ == EventCriticMode::disabled ? "iac" : "caac"; }
  const CaacConfig& config() const override { return config_; }
  const ActorNet& actor() const override { return actor_; }
  TrainStats update(Batch batch) override;
  nlohmann::json checkpoint() const override;
  void set_parallel(bool parallel) override { parallel_ = parallel; }

  /// Reads a checkpoint written by an agent of kind `expected` ("caac" or "iac").
  static std::unique_ptr<CaacAgent> from_checkpoint(const nlohmann::json& doc,
                                                    const std::string& expected);

  EventCriticMode mode() const { return mode_; }
  std::int64_t step() const { return step_; }

  ActorNet& actor_mut() { return actor_; }
  ValueNet& critic() { return critic_; }
  const ValueNet& critic() const { return critic_; }
  EventCriticNet& event_critic() { return event_; }
  const EventCriticNet& event_critic() const { return event_; }
  const ActorNet& target_actor() const { return target_actor_; }
  const ValueNet& target_critic() const { return target_critic_; }
  const EventCriticNet& target_event_critic() const { return target_event_; }

  /// Sets every event-critic parameter (and its target) to zero, so U = 0 and M = 0.
  void zero_event_critic();

  /// Bootstrapped target y; r for terminal transitions.
  double target_value(const Transition& t) const;
  /// Per-sample critic loss (y - (Q + U))^2 + beta * (empty-side penalties), recorded on `tape`.
  nn::Var sample_critic_loss(nn::Tape& tape, const Transition& t, double y) const;
  /// Per-sample -Q(s, actor(s)), recorded on `tape`.
  nn::Var sample_actor_loss(nn::Tape& tape, const Transition& t) const;

  /// Mean critic loss and its gradients (ego critic, event critic) without updating.
  double critic_gradients(Batch batch, nn::Gradients& critic, nn::Gradients& event);
  /// Gradient of -mean Q(s, actor(s)) w.r.t. the actor; returns mean Q.
  double actor_gradients(Batch batch, nn::Gradients& actor);
  double critic_loss(Batch batch);

  /// The three target networks move toward the online ones by tau.
  void soft_update_targets();

 private:
  void check_batch(Batch batch) const;

  CaacConfig config_;
  EventCriticMode mode_;
  std::mt19937_64 rng_;
  ActorNet actor_;
  ValueNet critic_;
  EventCriticNet event_;
  ActorNet target_actor_;
  ValueNet target_critic_;
  EventCriticNet target_event_;
  nn::AdamState actor_opt_;
  nn::AdamState critic_opt_;
  nn::AdamState event_opt_;
  BatchKernel critic_kernel_;
  BatchKernel actor_kernel_;
  std::vector<double> targets_;
  std::int64_t step_ = 0;
  bool parallel_ = true;
};

}  // namespace caac::agent
