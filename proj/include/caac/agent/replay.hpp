#pragma once

#include <cstddef>
#include <random>
#include <vector>

#include "caac/agent/networks.hpp"
#include "caac/env/env.hpp"

namespace caac::agent {

struct Transition {
  env::Observation obs;
  double action = 0.0;
  double reward = 0.0;
  bool terminal = false;
  env::Observation next_obs;
  SideFeatures up;  // window (t, t_next]
  SideFeatures down;
  bool has_next_window = false;  // false for terminal transitions
  SideFeatures next_up;          // the following window of the same bus
  SideFeatures next_down;

  // Centralized-critic inputs; empty unless the episode recorded them.
  std::vector<double> joint_obs;
  int joint_slot = -1;
  std::vector<double> next_joint_obs;
  int next_joint_slot = -1;

  bool operator==(const Transition&) const = default;
};

/// Fixed-capacity FIFO of transitions.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity);

  void push(Transition t);
  std::size_t size() const { return items_.size(); }
  std::size_t capacity() const { return capacity_; }
  /// Oldest first.
  const Transition& at(std::size_t i) const;

  /// Uniform without replacement, in random order. Throws StateError when
  /// fewer than `batch_size` transitions are stored.
  std::vector<const Transition*> sample(std::size_t batch_size, std::mt19937_64& rng) const;

 private:
  std::size_t capacity_;
  std::size_t head_ = 0;  // slot of the oldest item once full
  std::vector<Transition> items_;
};

/// Turns the environment's decisions into transitions. A decision is stored
/// once its reward is known and, unless terminal, once the same bus's next
/// window has closed, so both neighbor sets are complete.
class TransitionAssembler {
 public:
  explicit TransitionAssembler(double bus_gap_clip = 10.0) : clip_(bus_gap_clip) {}

  void poll(const env::HoldingEnv& env, ReplayBuffer& buffer);
  /// At episode end: stores every decision with a reward; a decision whose
  /// successor never received one is stored as terminal.
  void flush(const env::HoldingEnv& env, ReplayBuffer& buffer);
  std::size_t stored() const { return stored_; }

 private:
  Transition build(const env::HoldingEnv& env, const env::Decision& d,
                   const env::Decision* successor) const;

  double clip_;
  std::size_t seen_ = 0;
  std::vector<std::size_t> pending_;
  std::size_t stored_ = 0;
};

}  // namespace caac::agent
