#include "airtwin/game/metrics.hpp"

#include <vector>

#include "airtwin/error.hpp"

namespace airtwin::game {

SessionMetrics session_metrics(std::span<const MonitorSample> samples) {
  if (samples.size() < 2) throw InsufficientData("session metrics need at least two monitored samples");
  SessionMetrics m;
  m.start_ppm = samples.front().avg_ppm;
  m.end_ppm = samples.back().avg_ppm;
  m.reduction_ppm = m.start_ppm - m.end_ppm;
  m.duration_min = (samples.back().t - samples.front().t) / 60.0;
  if (m.reduction_ppm > 0.0) m.min_per_100ppm = m.duration_min / (m.reduction_ppm / 100.0);
  return m;
}

SessionMetrics session_metrics(const EventLog& log) {
  std::vector<MonitorSample> samples;
  for (const auto& e : log.events()) {
    if (e.kind == "monitor" && e.payload.contains("avg_ppm")) {
      samples.push_back({e.t, e.payload["avg_ppm"].get<double>()});
    }
  }
  return session_metrics(samples);
}

}  // namespace airtwin::game
