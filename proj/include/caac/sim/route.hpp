#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace caac::sim {

/// Static description of one bus route and its timetable.
struct RouteConfig {
  std::vector<double> stop_positions;  // meters from the terminal, first = 0
  int n_services = 1;
  double dispatch_mean = 600.0;  // s
  double dispatch_std = 0.0;     // s
  double nominal_speed = 30.0;   // km/h
  int capacity = 120;
  double t_alight = 1.8;  // s/pax
  double t_board = 3.0;   // s/pax
  double max_hold = 180.0;  // s
  double horizon = 57600.0;  // s

  int n_stops() const { return static_cast<int>(stop_positions.size()); }
  double route_length() const { return stop_positions.back(); }
  double speed_mps() const { return nominal_speed / 3.6; }

  /// Throws ConfigError naming the first violated invariant.
  void validate() const;

  bool operator==(const RouteConfig&) const = default;
};

/// Stationary synthetic demand: Poisson boarding per stop, destination weights per origin.
struct DemandProfile {
  std::vector<double> boarding_rate;               // pax/s per stop
  std::vector<std::vector<double>> alight_weights;  // [origin][destination]

  void validate(int n_stops) const;
  DemandProfile scaled(double factor) const;

  bool operator==(const DemandProfile&) const = default;
};

struct RouteSpec {
  std::string name;
  RouteConfig config;
  DemandProfile demand;
};

/// Synthetic presets: "desk" (20 stops, 8 buses, 4 h) and "R1s".."R4s"
/// (stops, services, length and dispatch mean/std of four real trunk routes,
/// with invented demand). Throws ConfigError for unknown names.
RouteSpec preset_route(const std::string& name);
std::vector<std::string> preset_names();

/// A preset name or a path to a route config file.
RouteSpec resolve_route(const std::string& name_or_path);

/// Evenly spaced stops; the demand profile uses a declining boarding-rate
/// profile and geometric destination weights with the given mean trip length.
DemandProfile synthetic_demand(int n_stops, double peak_rate, double mean_trip_stops);

// Route config file keys: stops, services, dispatch_mean_s, dispatch_std_s,
// speed_kmh, capacity, t_alight_s, t_board_s, max_hold_s, horizon_s,
// boarding_rates, alight_weights (plus an optional "name").
nlohmann::json route_to_json(const RouteSpec& route);
RouteSpec route_from_json(const nlohmann::json& doc);
RouteSpec load_route_file(const std::filesystem::path& path);
void save_route_file(const RouteSpec& route, const std::filesystem::path& path);

}  // namespace caac::sim
