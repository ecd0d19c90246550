#pragma once

#include <array>
#include <random>
#include <span>
#include <vector>

#include "caac/env/observation.hpp"
#include "caac/graph/event_graph.hpp"
#include "caac/nn/mlp.hpp"

namespace caac::agent {

inline constexpr std::size_t kNodeFeatureSize = 6;
using NodeFeature = std::array<double, kNodeFeatureSize>;

/// (obs, action, 0, 0): the ego vertex padded to the neighbor width.
NodeFeature ego_features(const env::Observation& obs, double action);
/// (obs, action, stop gap, min(bus gap, clip)).
NodeFeature neighbor_features(const graph::Neighbor& n, double bus_gap_clip);

/// The neighbor features of one side, rows sorted lexicographically so the
/// critic's floating-point sums do not depend on arrival order.
struct SideFeatures {
  std::vector<double> rows;  // count * kNodeFeatureSize

  std::size_t count() const { return rows.size() / kNodeFeatureSize; }
  bool empty() const { return rows.empty(); }
  std::span<const double> row(std::size_t k) const {
    return {rows.data() + k * kNodeFeatureSize, kNodeFeatureSize};
  }
  bool operator==(const SideFeatures&) const = default;
};

SideFeatures make_side(std::span<const graph::Neighbor> neighbors, double bus_gap_clip);
SideFeatures make_side(std::span<const NodeFeature> rows);

struct NetworkSizes {
  std::size_t hidden = 64;          // actor and ego-critic hidden width
  std::size_t attention = 32;       // rows of the shared attention matrix
  std::size_t head_hidden = 64;     // event-critic output network
  double leaky_slope = 0.2;         // attention scorer
};

/// Actor: obs (3) -> tanh -> tanh -> sigmoid, parameters "actor.*".
struct ActorNet {
  nn::ParameterSet params;
  nn::MlpLayout layout;

  static ActorNet create(const NetworkSizes& sizes, std::mt19937_64& rng);
  void relayout();
  nn::Var forward(nn::Tape& tape, nn::Var obs) const;
  double action(const env::Observation& obs) const;
};

/// Critic over a fixed-size input, parameters "<prefix>.*": (input) -> tanh -> tanh -> 1.
struct ValueNet {
  nn::ParameterSet params;
  nn::MlpLayout layout;
  std::string prefix;

  static ValueNet create(const std::string& prefix, std::size_t input, const NetworkSizes& sizes,
                         std::mt19937_64& rng);
  void relayout();
  nn::Var forward(nn::Tape& tape, nn::Var input) const;
};

/// Indices of one directional attention block inside EventCriticNet::params.
struct AttentionBlock {
  std::size_t shared = 0;  // W^a [attention, 6]
  std::size_t score_w = 0;  // [1, 2 * attention]
  std::size_t score_b = 0;  // [1]
};

struct SideOutput {
  nn::Var summary;  // M
  bool empty = true;
};

struct EventCriticOutput {
  nn::Var value;  // U, a constant 0 when both sides are empty
  SideOutput up;
  SideOutput down;
};

/// Graph-attention critic over the upstream and downstream events of a decision window.
struct EventCriticNet {
  nn::ParameterSet params;
  AttentionBlock up;
  AttentionBlock down;
  nn::MlpLayout head;
  double leaky_slope = 0.2;

  static EventCriticNet create(const NetworkSizes& sizes, std::mt19937_64& rng);
  void relayout();

  /// Softmax over neighbors of leaky(f(W h_ego || W h_k)). Throws ProtocolError for no neighbors.
  nn::Var attention_weights(nn::Tape& tape, const AttentionBlock& block, nn::Var ego,
                            const SideFeatures& side) const;
  /// M = tanh(W h_ego) + sum_k tanh(alpha_k W h_k); the ego term alone for an empty side.
  SideOutput aggregate_side(nn::Tape& tape, const AttentionBlock& block, nn::Var ego,
                            const SideFeatures& side) const;
  EventCriticOutput forward(nn::Tape& tape, nn::Var ego, const SideFeatures& up_side,
                            const SideFeatures& down_side) const;
};

/// G = Q + U.
inline double inductive_return(double q, double u) { return q + u; }

}  // namespace caac::agent
