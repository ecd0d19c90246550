#include "caac/io/logs.hpp"

#include "caac/io/csv.hpp"

namespace caac::io {

namespace {

const std::vector<std::string> kEventHeader = {"bus",      "stop",     "arrive_s",  "depart_s",
                                               "boarded",  "alighted", "occupancy", "hold_s"};
const std::vector<std::string> kPassengerHeader = {"origin", "destination", "arrive_s", "board_s",
                                                   "alight_s"};

void optional_cell(CsvWriter& out, const std::optional<double>& v) {
  if (v) {
    out.cell(*v);
  } else {
    out.empty();
  }
}

std::optional<double> optional_value(const std::string& text, const char* what) {
  if (text.empty()) return std::nullopt;
  return parse_double(text, what);
}

}  // namespace

void write_event_log(const std::filesystem::path& path, std::span<const sim::ArrivalEvent> events) {
  CsvWriter out(path, kEventHeader);
  for (const auto& e : events) {
    out.cell(e.bus_index).cell(e.stop).cell(e.time);
    optional_cell(out, e.departure_time);
    out.cell(e.n_boarded).cell(e.n_alighted).cell(e.occupancy).cell(e.hold);
    out.end_row();
  }
  out.close();
}

std::vector<sim::ArrivalEvent> read_event_log(const std::filesystem::path& path, int n_stops) {
  const CsvTable table = read_csv(path, kEventHeader);
  std::vector<sim::ArrivalEvent> events;
  events.reserve(table.rows.size());
  for (const auto& row : table.rows) {
    sim::ArrivalEvent e;
    e.bus_index = static_cast<int>(parse_int(row[0], "bus"));
    e.stop = static_cast<int>(parse_int(row[1], "stop"));
    e.time = parse_double(row[2], "arrive_s");
    e.departure_time = optional_value(row[3], "depart_s");
    e.n_boarded = static_cast<int>(parse_int(row[4], "boarded"));
    e.n_alighted = static_cast<int>(parse_int(row[5], "alighted"));
    e.occupancy = static_cast<int>(parse_int(row[6], "occupancy"));
    e.hold = parse_double(row[7], "hold_s");
    e.final_stop = e.stop + 1 == n_stops;
    events.push_back(e);
  }
  return events;
}

void write_passenger_log(const std::filesystem::path& path,
                         std::span<const sim::Passenger> passengers) {
  CsvWriter out(path, kPassengerHeader);
  for (const auto& p : passengers) {
    out.cell(p.origin).cell(p.destination).cell(p.arrive_time);
    optional_cell(out, p.board_time);
    optional_cell(out, p.alight_time);
    out.end_row();
  }
  out.close();
}

std::vector<sim::Passenger> read_passenger_log(const std::filesystem::path& path) {
  const CsvTable table = read_csv(path, kPassengerHeader);
  std::vector<sim::Passenger> out;
  out.reserve(table.rows.size());
  for (const auto& row : table.rows) {
    sim::Passenger p;
    p.origin = static_cast<int>(parse_int(row[0], "origin"));
    p.destination = static_cast<int>(parse_int(row[1], "destination"));
    p.arrive_time = parse_double(row[2], "arrive_s");
    p.board_time = optional_value(row[3], "board_s");
    p.alight_time = optional_value(row[4], "alight_s");
    out.push_back(p);
  }
  return out;
}

}  // namespace caac::io
