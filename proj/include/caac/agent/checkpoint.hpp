#pragma once

#include <string>

#include <nlohmann/json.hpp>

#include "caac/nn/params.hpp"

namespace caac::agent {

// Checkpoint layout: {format_version, kind, config, step, networks: {<block>: parameter set}}.

/// Throws FormatError naming the field if the header is missing or unsupported.
void check_checkpoint_header(const nlohmann::json& doc, int supported_version);
/// networks.<name>, or FormatError naming the missing block.
nn::ParameterSet checkpoint_block(const nlohmann::json& doc, const std::string& name);
/// Copies `loaded` into `into` after checking names and shapes match.
void assign_parameters(nn::ParameterSet& into, const nn::ParameterSet& loaded,
                       const std::string& block);

}  // namespace caac::agent
