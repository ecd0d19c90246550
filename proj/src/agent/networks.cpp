#include "caac/agent/networks.hpp"

#include <algorithm>

#include "caac/errors.hpp"

namespace caac::agent {

NodeFeature ego_features(const env::Observation& obs, double action) {
  return {obs.occupancy, obs.forward, obs.backward, action, 0.0, 0.0};
}

NodeFeature neighbor_features(const graph::Neighbor& n, double bus_gap_clip) {
  return {n.node.obs.occupancy, n.node.obs.forward, n.node.obs.backward, n.node.action,
          n.edge.stop_gap,      std::min(n.edge.bus_gap, bus_gap_clip)};
}

SideFeatures make_side(std::span<const NodeFeature> rows) {
  std::vector<NodeFeature> sorted(rows.begin(), rows.end());
  std::sort(sorted.begin(), sorted.end());
  SideFeatures side;
  side.rows.reserve(sorted.size() * kNodeFeatureSize);
  for (const auto& r : sorted) side.rows.insert(side.rows.end(), r.begin(), r.end());
  return side;
}

SideFeatures make_side(std::span<const graph::Neighbor> neighbors, double bus_gap_clip) {
  std::vector<NodeFeature> rows;
  rows.reserve(neighbors.size());
  for (const auto& n : neighbors) rows.push_back(neighbor_features(n, bus_gap_clip));
  return make_side(rows);
}

ActorNet ActorNet::create(const NetworkSizes& sizes, std::mt19937_64& rng) {
  ActorNet net;
  nn::MlpSpec spec{{env::kObservationSize, sizes.hidden, sizes.hidden, 1},
                   nn::Activation::tanh,
                   nn::Activation::sigmoid};
  nn::add_mlp_parameters(net.params, "actor", spec, rng);
  net.layout = nn::MlpLayout::resolve(net.params, "actor", spec);
  return net;
}

void ActorNet::relayout() { layout = nn::MlpLayout::resolve(params, "actor", layout.spec); }

nn::Var ActorNet::forward(nn::Tape& tape, nn::Var obs) const {
  return nn::mlp_forward(tape, params, layout, obs);
}

double ActorNet::action(const env::Observation& obs) const {
  nn::Tape tape;
  const auto v = obs.values();
  return tape.scalar(forward(tape, tape.constant(v)));
}

ValueNet ValueNet::create(const std::string& prefix, std::size_t input, const NetworkSizes& sizes,
                          std::mt19937_64& rng) {
  ValueNet net;
  net.prefix = prefix;
  nn::MlpSpec spec{{input, sizes.hidden, sizes.hidden, 1}, nn::Activation::tanh,
                   nn::Activation::identity};
  nn::add_mlp_parameters(net.params, prefix, spec, rng);
  net.layout = nn::MlpLayout::resolve(net.params, prefix, spec);
  return net;
}

void ValueNet::relayout() { layout = nn::MlpLayout::resolve(params, prefix, layout.spec); }

nn::Var ValueNet::forward(nn::Tape& tape, nn::Var input) const {
  return nn::mlp_forward(tape, params, layout, input);
}

namespace {

AttentionBlock add_block(nn::ParameterSet& params, const std::string& side, std::size_t width,
                         std::mt19937_64& rng) {
  nn::Tensor shared({width, kNodeFeatureSize});
  nn::Tensor unused({width});
  nn::init_dense(shared, unused, rng);
  nn::Tensor score_w({1, 2 * width});
  nn::Tensor score_b({1});
  nn::init_dense(score_w, score_b, rng);
  AttentionBlock block;
  block.shared = params.add("event." + side + ".attention", std::move(shared));
  block.score_w = params.add("event." + side + ".score.w", std::move(score_w));
  block.score_b = params.add("event." + side + ".score.b", std::move(score_b));
  return block;
}

AttentionBlock find_block(const nn::ParameterSet& params, const std::string& side) {
  AttentionBlock block;
  block.shared = params.index_of("event." + side + ".attention");
  block.score_w = params.index_of("event." + side + ".score.w");
  block.score_b = params.index_of("event." + side + ".score.b");
  const auto& shape = params[block.shared].value.shape;
  if (shape.size() != 2 || shape[1] != kNodeFeatureSize) {
    throw ArgumentError("event." + side + ".attention must have " +
                        std::to_string(kNodeFeatureSize) + " columns");
  }
  const auto& sw = params[block.score_w].value.shape;
  if (sw.size() != 2 || sw[0] != 1 || sw[1] != 2 * shape[0]) {
    throw ArgumentError("event." + side + ".score.w does not match the attention width");
  }
  return block;
}

nn::MlpSpec head_spec(const nn::ParameterSet& params) {
  const auto& shape = params[params.index_of("event.head.l0.w")].value.shape;
  if (shape.size() != 2) throw ArgumentError("event.head.l0.w must be a matrix");
  return {{shape[1], shape[0], 1}, nn::Activation::tanh, nn::Activation::identity};
}

}  // namespace

EventCriticNet EventCriticNet::create(const NetworkSizes& sizes, std::mt19937_64& rng) {
  EventCriticNet net;
  net.leaky_slope = sizes.leaky_slope;
  net.up = add_block(net.params, "up", sizes.attention, rng);
  net.down = add_block(net.params, "down", sizes.attention, rng);
  nn::MlpSpec spec{{sizes.attention, sizes.head_hidden, 1}, nn::Activation::tanh,
                   nn::Activation::identity};
  nn::add_mlp_parameters(net.params, "event.head", spec, rng);
  net.head = nn::MlpLayout::resolve(net.params, "event.head", spec);
  return net;
}

void EventCriticNet::relayout() {
  up = find_block(params, "up");
  down = find_block(params, "down");
  head = nn::MlpLayout::resolve(params, "event.head", head_spec(params));
  if (head.spec.input_size() != params[up.shared].value.rows()) {
    throw ArgumentError("event.head input width does not match the attention width");
  }
}

nn::Var EventCriticNet::attention_weights(nn::Tape& tape, const AttentionBlock& block, nn::Var ego,
                                          const SideFeatures& side) const {
  if (side.empty()) throw ProtocolError("attention_weights: the side has no neighbors");
  const nn::Var shared = tape.param(params, block.shared);
  const nn::Var score_w = tape.param(params, block.score_w);
  const nn::Var score_b = tape.param(params, block.score_b);
  const nn::Var ego_msg = tape.matvec(shared, ego);
  std::vector<nn::Var> scores;
  scores.reserve(side.count());
  for (std::size_t k = 0; k < side.count(); ++k) {
    const nn::Var msg = tape.matvec(shared, tape.constant(side.row(k)));
    const nn::Var s = tape.add(tape.matvec(score_w, tape.concat(ego_msg, msg)), score_b);
    scores.push_back(tape.leaky_relu(s, leaky_slope));
  }
  return tape.softmax(tape.stack(scores));
}

SideOutput EventCriticNet::aggregate_side(nn::Tape& tape, const AttentionBlock& block, nn::Var ego,
                                          const SideFeatures& side) const {
  const nn::Var shared = tape.param(params, block.shared);
  const nn::Var ego_msg = tape.matvec(shared, ego);
  SideOutput out;
  out.empty = side.empty();
  if (side.empty()) {
    out.summary = tape.tanh(ego_msg);
    return out;
  }
  const nn::Var score_w = tape.param(params, block.score_w);
  const nn::Var score_b = tape.param(params, block.score_b);
  std::vector<nn::Var> msgs;
  std::vector<nn::Var> scores;
  msgs.reserve(side.count());
  scores.reserve(side.count());
  for (std::size_t k = 0; k < side.count(); ++k) {
    const nn::Var msg = tape.matvec(shared, tape.constant(side.row(k)));
    const nn::Var s = tape.add(tape.matvec(score_w, tape.concat(ego_msg, msg)), score_b);
    scores.push_back(tape.leaky_relu(s, leaky_slope));
    msgs.push_back(msg);
  }
  const nn::Var alpha = tape.softmax(tape.stack(scores));
  std::vector<nn::Var> terms;
  terms.reserve(side.count() + 1);
  terms.push_back(tape.tanh(ego_msg));
  for (std::size_t k = 0; k < side.count(); ++k) {
    terms.push_back(tape.tanh(tape.scale_by(msgs[k], tape.element(alpha, k))));
  }
  out.summary = tape.add_n(terms);
  return out;
}

EventCriticOutput EventCriticNet::forward(nn::Tape& tape, nn::Var ego, const SideFeatures& up_side,
                                          const SideFeatures& down_side) const {
  if (tape.size(ego) != kNodeFeatureSize) {
    throw ArgumentError("event critic: ego features must have " +
                        std::to_string(kNodeFeatureSize) + " entries");
  }
  EventCriticOutput out;
  out.up = aggregate_side(tape, up, ego, up_side);
  out.down = aggregate_side(tape, down, ego, down_side);
  if (out.up.empty && out.down.empty) {
    out.value = tape.constant(0.0);
  } else {
    out.value = nn::mlp_forward(tape, params, head, tape.add(out.up.summary, out.down.summary));
  }
  return out;
}

}  // namespace caac::agent
