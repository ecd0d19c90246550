#pragma once

#include <cstddef>

#include <nlohmann/json.hpp>

#include "caac/agent/networks.hpp"

namespace caac::agent {

struct CaacConfig {
  double gamma = 0.99;
  double actor_lr = 1e-4;
  double critic_lr = 1e-3;
  double tau = 0.005;
  std::size_t batch_size = 64;
  std::size_t buffer_capacity = 100000;
  double sigma_start = 0.2;  // exploration noise, decayed linearly over training
  double sigma_end = 0.02;
  double beta = 0.1;  // weight of the empty-side penalty
  double w = 0.2;     // reward weight of the holding term
  double max_hold = 180.0;
  double bus_gap_clip = 10.0;
  std::size_t updates_per_decision = 1;
  std::size_t warmup = 64;  // transitions stored before the first update
  NetworkSizes sizes;

  /// Throws ConfigError naming the first invalid field.
  void validate() const;
  bool operator==(const CaacConfig&) const = default;
};

nlohmann::json to_json(const CaacConfig& config);
/// Missing keys keep their defaults; wrong types raise ConfigError.
CaacConfig caac_config_from_json(const nlohmann::json& doc);

/// Linear decay from sigma_start (progress 0) to sigma_end (progress 1).
double exploration_sigma(const CaacConfig& config, double progress);

}  // namespace caac::agent
