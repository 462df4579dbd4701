#pragma once

#include <optional>
#include <span>

#include "airtwin/game/events.hpp"

namespace airtwin::game {

/// Monitored-average concentration at one instant.
struct MonitorSample {
  double t = 0.0;
  double avg_ppm = 0.0;
};

struct SessionMetrics {
  double start_ppm = 0.0;
  double end_ppm = 0.0;
  double reduction_ppm = 0.0;
  double duration_min = 0.0;
  /// Minutes per 100 ppm of reduction; absent unless reduction > 0.
  std::optional<double> min_per_100ppm;
};

/// First and last samples bound the session. Throws InsufficientData with
/// fewer than two samples.
SessionMetrics session_metrics(std::span<const MonitorSample> samples);

/// Same, from the "monitor" records of an event log.
SessionMetrics session_metrics(const EventLog& log);

}  // namespace airtwin::game
