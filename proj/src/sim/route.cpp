#include "caac/sim/route.hpp"

#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "caac/errors.hpp"

namespace caac::sim {

void RouteConfig::validate() const {
  if (stop_positions.size() < 2) throw ConfigError("stops: a route needs at least 2 stops");
  if (stop_positions.front() != 0.0) throw ConfigError("stops: first stop must be at position 0");
  for (std::size_t k = 1; k < stop_positions.size(); ++k) {
    if (!(stop_positions[k] > stop_positions[k - 1])) {
      throw ConfigError("stops: positions must be strictly increasing (stop " +
                        std::to_string(k) + ")");
    }
  }
  if (n_services < 1) throw ConfigError("services: must be at least 1");
  if (!(dispatch_mean > 0.0)) throw ConfigError("dispatch_mean_s: must be > 0");
  if (!(dispatch_std >= 0.0)) throw ConfigError("dispatch_std_s: must be >= 0");
  if (!(nominal_speed > 0.0)) throw ConfigError("speed_kmh: must be > 0");
  if (capacity < 1) throw ConfigError("capacity: must be at least 1");
  if (!(t_alight >= 0.0)) throw ConfigError("t_alight_s: must be >= 0");
  if (!(t_board >= 0.0)) throw ConfigError("t_board_s: must be >= 0");
  if (!(max_hold >= 0.0)) throw ConfigError("max_hold_s: must be >= 0");
  if (!(horizon > 0.0)) throw ConfigError("horizon_s: must be > 0");
}

void DemandProfile::validate(int n_stops) const {
  const auto n = static_cast<std::size_t>(n_stops);
  if (boarding_rate.size() != n) {
    throw ConfigError("boarding_rates: expected one rate per stop (" + std::to_string(n) + ")");
  }
  for (double r : boarding_rate) {
    if (!(r >= 0.0) || !std::isfinite(r)) throw ConfigError("boarding_rates: rates must be >= 0");
  }
  if (boarding_rate.back() != 0.0) throw ConfigError("boarding_rates: last stop rate must be 0");
  if (alight_weights.size() != n) {
    throw ConfigError("alight_weights: expected one row per stop (" + std::to_string(n) + ")");
  }
  for (std::size_t o = 0; o < n; ++o) {
    const auto& row = alight_weights[o];
    if (row.size() != n) {
      throw ConfigError("alight_weights: row " + std::to_string(o) + " must have " +
                        std::to_string(n) + " entries");
    }
    double total = 0.0;
    for (std::size_t d = 0; d < n; ++d) {
      if (!(row[d] >= 0.0)) throw ConfigError("alight_weights: weights must be >= 0");
      if (d <= o && row[d] != 0.0) {
        throw ConfigError("alight_weights: row " + std::to_string(o) +
                          " has weight on a stop that is not downstream");
      }
      total += row[d];
    }
    if (o + 1 < n && std::abs(total - 1.0) > 1e-9) {
      throw ConfigError("alight_weights: row " + std::to_string(o) + " must sum to 1");
    }
  }
}

DemandProfile DemandProfile::scaled(double factor) const {
  DemandProfile out = *this;
  for (double& r : out.boarding_rate) r *= factor;
  return out;
}

DemandProfile synthetic_demand(int n_stops, double peak_rate, double mean_trip_stops) {
  const auto n = static_cast<std::size_t>(n_stops);
  DemandProfile demand;
  demand.boarding_rate.assign(n, 0.0);
  for (std::size_t k = 0; k + 1 < n; ++k) {
    const double frac = n > 2 ? static_cast<double>(k) / static_cast<double>(n - 2) : 0.0;
    demand.boarding_rate[k] = peak_rate * (1.0 - 0.5 * frac);
  }
  demand.alight_weights.assign(n, std::vector<double>(n, 0.0));
  const double decay = std::exp(-1.0 / std::max(mean_trip_stops, 1e-9));
  for (std::size_t o = 0; o + 1 < n; ++o) {
    auto& row = demand.alight_weights[o];
    double total = 0.0;
    for (std::size_t d = o + 1; d < n; ++d) {
      row[d] = std::pow(decay, static_cast<double>(d - o - 1));
      total += row[d];
    }
    for (std::size_t d = o + 1; d < n; ++d) row[d] /= total;
  }
  return demand;
}

namespace {

RouteSpec make_preset(std::string name, int stops, double length_m, int services, double mean,
                      double stdev, double horizon, double peak_rate, double mean_trip) {
  RouteSpec spec;
  spec.name = std::move(name);
  spec.config.stop_positions.resize(static_cast<std::size_t>(stops));
  for (int k = 0; k < stops; ++k) {
    spec.config.stop_positions[static_cast<std::size_t>(k)] =
        length_m * static_cast<double>(k) / static_cast<double>(stops - 1);
  }
  spec.config.n_services = services;
  spec.config.dispatch_mean = mean;
  spec.config.dispatch_std = stdev;
  spec.config.horizon = horizon;
  spec.demand = synthetic_demand(stops, peak_rate, mean_trip);
  return spec;
}

}  // namespace

std::vector<std::string> preset_names() { return {"desk", "R1s", "R2s", "R3s", "R4s"}; }

RouteSpec preset_route(const std::string& name) {
  // R1s..R4s mirror the length, stop count and headway statistics of four real
  // routes; demand rates and trip lengths are synthetic.
  if (name == "desk") return make_preset(name, 20, 11400.0, 8, 360.0, 100.0, 14400.0, 1.0 / 40.0, 6.0);
  if (name == "R1s") return make_preset(name, 46, 17400.0, 59, 874.0, 302.0, 57600.0, 1.0 / 150.0, 12.0);
  if (name == "R2s") return make_preset(name, 58, 23700.0, 72, 745.0, 307.0, 57600.0, 1.0 / 150.0, 14.0);
  if (name == "R3s") return make_preset(name, 61, 23200.0, 57, 931.0, 354.0, 57600.0, 1.0 / 170.0, 14.0);
  if (name == "R4s") return make_preset(name, 46, 22500.0, 55, 955.0, 351.0, 57600.0, 1.0 / 170.0, 12.0);
  throw ConfigError("unknown route preset '" + name + "'");
}

RouteSpec resolve_route(const std::string& name_or_path) {
  for (const auto& n : preset_names()) {
    if (n == name_or_path) return preset_route(n);
  }
  return load_route_file(name_or_path);
}

nlohmann::json route_to_json(const RouteSpec& route) {
  const RouteConfig& c = route.config;
  return {
      {"name", route.name},
      {"stops", c.stop_positions},
      {"services", c.n_services},
      {"dispatch_mean_s", c.dispatch_mean},
      {"dispatch_std_s", c.dispatch_std},
      {"speed_kmh", c.nominal_speed},
      {"capacity", c.capacity},
      {"t_alight_s", c.t_alight},
      {"t_board_s", c.t_board},
      {"max_hold_s", c.max_hold},
      {"horizon_s", c.horizon},
      {"boarding_rates", route.demand.boarding_rate},
      {"alight_weights", route.demand.alight_weights},
  };
}

RouteSpec route_from_json(const nlohmann::json& doc) {
  if (!doc.is_object()) throw ConfigError("route config: expected an object");
  auto field = [&](const char* key) -> const nlohmann::json& {
    if (!doc.contains(key)) throw ConfigError(std::string("route config: missing key '") + key + "'");
    return doc.at(key);
  };
  RouteSpec spec;
  try {
    spec.name = doc.value("name", std::string("custom"));
    RouteConfig& c = spec.config;
    c.stop_positions = field("stops").get<std::vector<double>>();
    c.n_services = field("services").get<int>();
    c.dispatch_mean = field("dispatch_mean_s").get<double>();
    c.dispatch_std = field("dispatch_std_s").get<double>();
    c.nominal_speed = field("speed_kmh").get<double>();
    c.capacity = field("capacity").get<int>();
    c.t_alight = field("t_alight_s").get<double>();
    c.t_board = field("t_board_s").get<double>();
    c.max_hold = field("max_hold_s").get<double>();
    c.horizon = field("horizon_s").get<double>();
    spec.demand.boarding_rate = field("boarding_rates").get<std::vector<double>>();
    spec.demand.alight_weights = field("alight_weights").get<std::vector<std::vector<double>>>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("route config: ") + e.what());
  }
  spec.config.validate();
  spec.demand.validate(spec.config.n_stops());
  return spec;
}

RouteSpec load_route_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open route config '" + path.string() + "'");
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("route config '" + path.string() + "': " + e.what());
  }
  return route_from_json(doc);
}

void save_route_file(const RouteSpec& route, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << route_to_json(route).dump(2) << '\n';
}

}  // namespace caac::sim
