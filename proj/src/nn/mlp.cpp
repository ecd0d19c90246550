#include "caac/nn/mlp.hpp"

#include "caac/errors.hpp"

namespace caac::nn {

namespace {

std::string layer_name(const std::string& prefix, std::size_t k, const char* what) {
  return prefix + ".l" + std::to_string(k) + "." + what;
}

}  // namespace

void add_mlp_parameters(ParameterSet& params, const std::string& prefix, const MlpSpec& spec,
                        std::mt19937_64& rng) {
  if (spec.sizes.size() < 2) throw ArgumentError("mlp spec needs at least input and output size");
  for (std::size_t k = 0; k + 1 < spec.sizes.size(); ++k) {
    Tensor w({spec.sizes[k + 1], spec.sizes[k]});
    Tensor b({spec.sizes[k + 1]});
    init_dense(w, b, rng);
    params.add(layer_name(prefix, k, "w"), std::move(w));
    params.add(layer_name(prefix, k, "b"), std::move(b));
  }
}

Var apply_activation(Tape& tape, Var x, Activation act, double leaky_slope) {
  switch (act) {
    case Activation::identity:
      return x;
    case Activation::tanh:
      return tape.tanh(x);
    case Activation::sigmoid:
      return tape.sigmoid(x);
    case Activation::leaky_relu:
      return tape.leaky_relu(x, leaky_slope);
  }
  return x;
}

MlpLayout MlpLayout::resolve(const ParameterSet& params, const std::string& prefix,
                             MlpSpec spec) {
  MlpLayout layout;
  for (std::size_t k = 0; k < spec.layer_count(); ++k) {
    const std::size_t w = params.index_of(layer_name(prefix, k, "w"));
    const std::size_t b = params.index_of(layer_name(prefix, k, "b"));
    const auto& shape = params[w].value.shape;
    if (shape.size() != 2 || shape[0] != spec.sizes[k + 1] || shape[1] != spec.sizes[k]) {
      throw ArgumentError("parameter '" + params[w].name + "' does not match the layer spec");
    }
    layout.weight.push_back(w);
    layout.bias.push_back(b);
  }
  layout.spec = std::move(spec);
  return layout;
}

Var mlp_forward(Tape& tape, const ParameterSet& params, const MlpLayout& layout, Var input) {
  const MlpSpec& spec = layout.spec;
  if (tape.size(input) != spec.input_size()) {
    throw ArgumentError("mlp_forward: input has " + std::to_string(tape.size(input)) +
                        " values, layer spec expects " + std::to_string(spec.input_size()));
  }
  Var x = input;
  for (std::size_t k = 0; k < spec.layer_count(); ++k) {
    Var w = tape.param(params, layout.weight[k]);
    Var b = tape.param(params, layout.bias[k]);
    x = tape.add(tape.matvec(w, x), b);
    const bool last = k + 1 == spec.layer_count();
    x = apply_activation(tape, x, last ? spec.output : spec.hidden, spec.leaky_slope);
  }
  return x;
}

Var mlp_forward(Tape& tape, const ParameterSet& params, const std::string& prefix,
                const MlpSpec& spec, Var input) {
  return mlp_forward(tape, params, MlpLayout::resolve(params, prefix, spec), input);
}

}  // namespace caac::nn
