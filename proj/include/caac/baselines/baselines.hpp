#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "caac/agent/agent.hpp"
#include "caac/env/env.hpp"

namespace caac::baselines {

/// Forward-headway holding: d = max(0, d_bar + gain * (H0 - h_minus)), capped at max_hold.
struct FhParams {
  double target_headway = 600.0;  // H0, s
  double mean_delay = 30.0;       // d_bar, s
  double gain = 0.15;

  void validate() const;
};

FhParams default_fh_params(double dispatch_mean);
double fh_hold(double h_minus, const FhParams& p, double max_hold);

/// Never holds.
env::Policy nc_policy();
/// Reads the forward headway from the observation (scaled back to seconds).
env::Policy fh_policy(const FhParams& p, double dispatch_mean, double max_hold);

/// Joint critic input: every slot's observation plus one action per slot,
/// zero except for the deciding bus.
struct JointFeature {
  std::vector<double> observations;  // slots * 3
  std::vector<double> actions;       // slots
};

/// Observation slots are the active buses in index order (the lowest `slots`
/// are kept when the fleet is larger); `slot` is the deciding bus's slot or -1.
JointFeature maddpg_joint(std::span<const double> joint_obs, int slot, double action, int slots);

/// DDPG with a centralized critic over JointFeature and a local actor.
class MaddpgAgent final : public agent::Learner {
 public:
  MaddpgAgent(agent::CaacConfig config, int slots, std::uint64_t seed);

  std::string kind() const override { return "maddpg"; }
  const agent::CaacConfig& config() const override { return config_; }
  const agent::ActorNet& actor() const override { return actor_; }
  int joint_slots() const override { return slots_; }
  agent::TrainStats update(agent::Batch batch) override;
  nlohmann::json checkpoint() const override;
  void set_parallel(bool parallel) override { parallel_ = parallel; }

  static std::unique_ptr<MaddpgAgent> from_checkpoint(const nlohmann::json& doc);

  const agent::ValueNet& critic() const { return critic_; }
  double target_value(const agent::Transition& t) const;

 private:
  nn::Var joint_input(nn::Tape& tape, std::span<const double> joint_obs, int slot,
                      nn::Var action) const;

  agent::CaacConfig config_;
  int slots_;
  std::mt19937_64 rng_;
  agent::ActorNet actor_;
  agent::ValueNet critic_;
  agent::ActorNet target_actor_;
  agent::ValueNet target_critic_;
  nn::AdamState actor_opt_;
  nn::AdamState critic_opt_;
  agent::BatchKernel critic_kernel_;
  agent::BatchKernel actor_kernel_;
  std::vector<double> targets_;
  std::int64_t step_ = 0;
  bool parallel_ = true;
};

/// The CAAC agent with its event critic disabled.
std::unique_ptr<agent::CaacAgent> iac_factory(const agent::CaacConfig& config, std::uint64_t seed);

}  // namespace caac::baselines
