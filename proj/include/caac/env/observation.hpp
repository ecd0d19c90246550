#pragma once

#include <array>

namespace caac::env {

/// Local state of one bus at a stop, normalized so it transfers across routes.
struct Observation {
  double occupancy = 0.0;  // onboard / capacity
  double forward = 0.0;    // forward headway / dispatch_mean
  double backward = 0.0;   // backward headway / dispatch_mean

  std::array<double, 3> values() const { return {occupancy, forward, backward}; }
  bool operator==(const Observation&) const = default;
};

inline constexpr std::size_t kObservationSize = 3;

}  // namespace caac::env
