#include <fstream>

#include <gtest/gtest.h>

#include "caac/errors.hpp"
#include "caac/io/csv.hpp"
#include "caac/io/logs.hpp"
#include "caac/sim/route.hpp"
#include "caac/sim/simulator.hpp"
#include "support.hpp"

using namespace caac;

TEST(Csv, DoublesRoundTripExactly) {
  for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 123456789.123456789, 0.0}) {
    EXPECT_EQ(io::parse_double(io::format_double(v), "v"), v);
  }
  EXPECT_THROW(io::parse_double("1.5x", "v"), caac::FormatError);
  EXPECT_THROW(io::parse_int("", "n"), caac::FormatError);
}

TEST(Csv, HeaderAndRaggedRows) {
  caac::testing::TempDir dir;
  {
    io::CsvWriter w(dir / "a.csv", {"x", "y"});
    w.cell(1).cell(2.5);
    w.end_row();
    w.close();
  }
  const auto t = io::read_csv(dir / "a.csv", {"x", "y"});
  ASSERT_EQ(t.rows.size(), 1u);
  EXPECT_EQ(t.column("y"), 1u);
  EXPECT_THROW(t.column("z"), caac::FormatError);
  EXPECT_THROW(io::read_csv(dir / "a.csv", {"x", "z"}), caac::FormatError);
  std::ofstream(dir / "b.csv") << "x,y\n1,2,3\n";
  EXPECT_THROW(io::read_csv(dir / "b.csv"), caac::FormatError);
  EXPECT_THROW(io::read_csv(dir / "missing.csv"), caac::IoError);
}

TEST(Logs, EventAndPassengerLogsRoundTrip) {
  caac::testing::TempDir dir;
  const auto r = sim::preset_route("desk");
  auto sim = sim::Simulation::build(r.config, r.demand, 12);
  while (auto ev = sim.advance_to_next_arrival()) {
    if (!ev->final_stop) sim.apply_holding(*ev, 12.5);
  }
  io::write_event_log(dir / "e.csv", sim.event_log());
  io::write_passenger_log(dir / "p.csv", sim.passengers());
  const auto events = io::read_event_log(dir / "e.csv", r.config.n_stops());
  ASSERT_EQ(events.size(), sim.event_log().size());
  for (std::size_t i = 0; i < events.size(); ++i) {
    const auto& a = events[i];
    const auto& b = sim.event_log()[i];
    EXPECT_EQ(a.bus_index, b.bus_index);
    EXPECT_EQ(a.stop, b.stop);
    EXPECT_EQ(a.time, b.time);
    EXPECT_EQ(a.departure_time, b.departure_time);
    EXPECT_EQ(a.occupancy, b.occupancy);
    EXPECT_EQ(a.hold, b.hold);
    EXPECT_EQ(a.final_stop, b.final_stop);
  }
  EXPECT_EQ(io::read_passenger_log(dir / "p.csv"), sim.passengers());
}
