#pragma once

#include <filesystem>
#include <span>
#include <vector>

#include "caac/sim/simulator.hpp"

namespace caac::io {

// Event log columns: bus,stop,arrive_s,depart_s,boarded,alighted,occupancy,hold_s
// (depart_s is empty for a bus still at a stop when the horizon closed).
void write_event_log(const std::filesystem::path& path, std::span<const sim::ArrivalEvent> events);
/// `n_stops` marks final-stop arrivals.
std::vector<sim::ArrivalEvent> read_event_log(const std::filesystem::path& path, int n_stops);

// Passenger log columns: origin,destination,arrive_s,board_s,alight_s (empty when unset).
void write_passenger_log(const std::filesystem::path& path,
                         std::span<const sim::Passenger> passengers);
std::vector<sim::Passenger> read_passenger_log(const std::filesystem::path& path);

}  // namespace caac::io
