#pragma once

#include <cstddef>
#include <random>
#include <string>
#include <vector>

#include "caac/nn/params.hpp"
#include "caac/nn/tape.hpp"

namespace caac::nn {

enum class Activation { identity, tanh, sigmoid, leaky_relu };

/// Layer widths from input to output, e.g. {3, 64, 64, 1}.
struct MlpSpec {
  std::vector<std::size_t> sizes;
  Activation hidden = Activation::tanh;
  Activation output = Activation::identity;
  double leaky_slope = 0.2;

  std::size_t input_size() const { return sizes.front(); }
  std::size_t output_size() const { return sizes.back(); }
  std::size_t layer_count() const { return sizes.size() - 1; }
};

/// Adds "<prefix>.l<k>.w" [out, in] and "<prefix>.l<k>.b" [out] for every layer,
/// initialised uniformly in +-1/sqrt(fan_in).
void add_mlp_parameters(ParameterSet& params, const std::string& prefix, const MlpSpec& spec,
                        std::mt19937_64& rng);

Var apply_activation(Tape& tape, Var x, Activation act, double leaky_slope);

/// Dense + activation stack; parameters are looked up by prefix.
Var mlp_forward(Tape& tape, const ParameterSet& params, const std::string& prefix,
                const MlpSpec& spec, Var input);

/// Resolved parameter indices for a prefix, so hot loops skip the name lookup.
struct MlpLayout {
  MlpSpec spec;
  std::vector<std::size_t> weight;
  std::vector<std::size_t> bias;

  static MlpLayout resolve(const ParameterSet& params, const std::string& prefix, MlpSpec spec);
};

Var mlp_forward(Tape& tape, const ParameterSet& params, const MlpLayout& layout, Var input);

}  // namespace caac::nn
