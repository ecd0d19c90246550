#include "caac/agent/checkpoint.hpp"

#include "caac/errors.hpp"

namespace caac::agent {

void check_checkpoint_header(const nlohmann::json& doc, int supported_version) {
  if (!doc.is_object()) throw FormatError("checkpoint: expected a JSON object");
  for (const char* key : {"format_version", "kind", "config", "step", "networks"}) {
    if (!doc.contains(key)) throw FormatError(std::string("checkpoint: missing field '") + key + "'");
  }
  if (!doc["format_version"].is_number_integer() ||
      doc["format_version"].get<int>() != supported_version) {
    throw FormatError("checkpoint: unsupported 'format_version' " + doc["format_version"].dump());
  }
  if (!doc["kind"].is_string()) throw FormatError("checkpoint: field 'kind' must be a string");
  if (!doc["networks"].is_object()) throw FormatError("checkpoint: field 'networks' must be an object");
}

nn::ParameterSet checkpoint_block(const nlohmann::json& doc, const std::string& name) {
  const auto& nets = doc.at("networks");
  if (!nets.contains(name)) {
    throw FormatError("checkpoint: missing network block 'networks." + name + "'");
  }
  try {
    return nn::parameter_set_from_json(nets.at(name));
  } catch (const FormatError& e) {
    throw FormatError("checkpoint: block 'networks." + name + "': " + e.what());
  }
}

void assign_parameters(nn::ParameterSet& into, const nn::ParameterSet& loaded,
                       const std::string& block) {
  if (into.size() != loaded.size()) {
    throw FormatError("checkpoint: block 'networks." + block + "' has " +
                      std::to_string(loaded.size()) + " parameters, expected " +
                      std::to_string(into.size()));
  }
  for (std::size_t i = 0; i < into.size(); ++i) {
    if (into[i].name != loaded[i].name || into[i].value.shape != loaded[i].value.shape) {
      throw FormatError("checkpoint: block 'networks." + block + "' parameter '" + loaded[i].name +
                        "' does not match '" + into[i].name + "'");
    }
    into[i].value.data = loaded[i].value.data;
  }
}

}  // namespace caac::agent
