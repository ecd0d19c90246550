#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <string>

#include "caac/errors.hpp"
#include "caac/harness/harness.hpp"

namespace caac::harness {

namespace {

constexpr double kWidth = 1200.0;
constexpr double kHeight = 700.0;
constexpr double kMargin = 60.0;

std::string fmt(const char* pattern, double a, double b = 0.0) {
  char buf[64];
  std::snprintf(buf, sizeof buf, pattern, a, b);
  return buf;
}

// Load factor 0 -> green, 1 -> red.
std::string load_color(double load) {
  const double f = std::clamp(load, 0.0, 1.0);
  const int r = static_cast<int>(220.0 * f + 0.5);
  const int g = static_cast<int>(160.0 * (1.0 - f) + 0.5);
  char buf[16];
  std::snprintf(buf, sizeof buf, "#%02x%02x00", r, g);
  return buf;
}

}  // namespace

void emit_trajectory_svg(std::span<const sim::ArrivalEvent> events, const sim::RouteConfig& config,
                         const std::filesystem::path& path) {
  if (events.empty()) throw ArgumentError("emit_trajectory_svg: the event log is empty");
  double t0 = events.front().time;
  double t1 = t0;
  for (const auto& e : events) {
    t0 = std::min(t0, e.time);
    t1 = std::max(t1, e.departure_time.value_or(e.time));
  }
  if (t1 <= t0) t1 = t0 + 1.0;
  const double length = config.route_length();
  auto px = [&](double t) { return kMargin + (t - t0) / (t1 - t0) * (kWidth - 2 * kMargin); };
  auto py = [&](double x) { return kHeight - kMargin - x / length * (kHeight - 2 * kMargin); };

  std::map<int, std::vector<const sim::ArrivalEvent*>> by_bus;
  for (const auto& e : events) by_bus[e.bus_index].push_back(&e);

  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt("%.0f", kWidth)
      << "\" height=\"" << fmt("%.0f", kHeight) << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<line x1=\"" << fmt("%.2f", kMargin) << "\" y1=\"" << fmt("%.2f", kHeight - kMargin)
      << "\" x2=\"" << fmt("%.2f", kWidth - kMargin) << "\" y2=\"" << fmt("%.2f", kHeight - kMargin)
      << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << fmt("%.2f", kMargin) << "\" y1=\"" << fmt("%.2f", kMargin)
      << "\" x2=\"" << fmt("%.2f", kMargin) << "\" y2=\"" << fmt("%.2f", kHeight - kMargin)
      << "\" stroke=\"black\"/>\n";
  out << "<text x=\"" << fmt("%.2f", kWidth / 2) << "\" y=\"" << fmt("%.2f", kHeight - 20)
      << "\" text-anchor=\"middle\" font-size=\"14\">time " << fmt("%.0f", t0) << " to "
      << fmt("%.0f", t1) << " s</text>\n";
  out << "<text x=\"20\" y=\"" << fmt("%.2f", kHeight / 2)
      << "\" font-size=\"14\" transform=\"rotate(-90 20 " << fmt("%.2f", kHeight / 2)
      << ")\" text-anchor=\"middle\">distance (0 to " << fmt("%.0f", length) << " m)</text>\n";

  for (const auto& [bus, visits] : by_bus) {
    out << "<g id=\"bus-" << bus << "\" fill=\"none\" stroke-width=\"1.5\">\n";
    for (std::size_t k = 0; k < visits.size(); ++k) {
      const sim::ArrivalEvent& here = *visits[k];
      const double x = config.stop_positions[static_cast<std::size_t>(here.stop)];
      std::string points = fmt("%.2f,%.2f", px(here.time), py(x));
      if (here.departure_time) points += " " + fmt("%.2f,%.2f", px(*here.departure_time), py(x));
      const bool last = k + 1 == visits.size();
      if (!last && here.departure_time) {
        const sim::ArrivalEvent& next = *visits[k + 1];
        points += " " + fmt("%.2f,%.2f", px(next.time),
                            py(config.stop_positions[static_cast<std::size_t>(next.stop)]));
        if (k + 2 == visits.size() && next.departure_time) {
          points += " " + fmt("%.2f,%.2f", px(*next.departure_time),
                              py(config.stop_positions[static_cast<std::size_t>(next.stop)]));
        }
      } else if (!last || k > 0) {
        continue;  // drawn as the tail of the previous link
      }
      const double load = static_cast<double>(here.occupancy) / config.capacity;
      out << "<polyline stroke=\"" << load_color(load) << "\" points=\"" << points << "\"/>\n";
    }
    out << "</g>\n";
  }
  out << "</svg>\n";
  if (!out) throw IoError("error writing '" + path.string() + "'");
}

}  // namespace caac::harness
