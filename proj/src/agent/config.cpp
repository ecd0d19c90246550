#include "caac/agent/config.hpp"

#include <algorithm>
#include <string>

#include "caac/errors.hpp"

namespace caac::agent {

void CaacConfig::validate() const {
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0)) throw ConfigError(std::string(name) + " must be > 0");
  };
  if (!(gamma >= 0.0 && gamma < 1.0)) throw ConfigError("gamma must lie in [0, 1)");
  positive(actor_lr, "actor_lr");
  positive(critic_lr, "critic_lr");
  if (!(tau > 0.0 && tau <= 1.0)) throw ConfigError("tau must lie in (0, 1]");
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (buffer_capacity < batch_size) throw ConfigError("buffer_capacity must be >= batch_size");
  if (!(sigma_start >= 0.0) || !(sigma_end >= 0.0)) throw ConfigError("sigma must be >= 0");
  if (!(beta >= 0.0)) throw ConfigError("beta must be >= 0");
  if (!(w >= 0.0 && w <= 1.0)) throw ConfigError("w must lie in [0, 1]");
  if (!(max_hold >= 0.0)) throw ConfigError("max_hold must be >= 0");
  positive(bus_gap_clip, "bus_gap_clip");
  if (sizes.hidden < 1 || sizes.attention < 1 || sizes.head_hidden < 1) {
    throw ConfigError("network sizes must be >= 1");
  }
}

nlohmann::json to_json(const CaacConfig& c) {
  return {
      {"gamma", c.gamma},
      {"actor_lr", c.actor_lr},
      {"critic_lr", c.critic_lr},
      {"tau", c.tau},
      {"batch_size", c.batch_size},
      {"buffer_capacity", c.buffer_capacity},
      {"sigma_start", c.sigma_start},
      {"sigma_end", c.sigma_end},
      {"beta", c.beta},
      {"w", c.w},
      {"max_hold", c.max_hold},
      {"bus_gap_clip", c.bus_gap_clip},
      {"updates_per_decision", c.updates_per_decision},
      {"warmup", c.warmup},
      {"hidden", c.sizes.hidden},
      {"attention", c.sizes.attention},
      {"head_hidden", c.sizes.head_hidden},
      {"leaky_slope", c.sizes.leaky_slope},
  };
}

CaacConfig caac_config_from_json(const nlohmann::json& doc) {
  if (!doc.is_object()) throw ConfigError("agent config: expected an object");
  CaacConfig c;
  try {
    c.gamma = doc.value("gamma", c.gamma);
    c.actor_lr = doc.value("actor_lr", c.actor_lr);
    c.critic_lr = doc.value("critic_lr", c.critic_lr);
    c.tau = doc.value("tau", c.tau);
    c.batch_size = doc.value("batch_size", c.batch_size);
    c.buffer_capacity = doc.value("buffer_capacity", c.buffer_capacity);
    c.sigma_start = doc.value("sigma_start", c.sigma_start);
    c.sigma_end = doc.value("sigma_end", c.sigma_end);
    c.beta = doc.value("beta", c.beta);
    c.w = doc.value("w", c.w);
    c.max_hold = doc.value("max_hold", c.max_hold);
    c.bus_gap_clip = doc.value("bus_gap_clip", c.bus_gap_clip);
    c.updates_per_decision = doc.value("updates_per_decision", c.updates_per_decision);
    c.warmup = doc.value("warmup", c.warmup);
    c.sizes.hidden = doc.value("hidden", c.sizes.hidden);
    c.sizes.attention = doc.value("attention", c.sizes.attention);
    c.sizes.head_hidden = doc.value("head_hidden", c.sizes.head_hidden);
    c.sizes.leaky_slope = doc.value("leaky_slope", c.sizes.leaky_slope);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("agent config: ") + e.what());
  }
  c.validate();
  return c;
}

double exploration_sigma(const CaacConfig& config, double progress) {
  const double p = std::clamp(progress, 0.0, 1.0);
  return config.sigma_start + (config.sigma_end - config.sigma_start) * p;
}

}  // namespace caac::agent
