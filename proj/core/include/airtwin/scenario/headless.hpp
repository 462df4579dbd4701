#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "airtwin/game/events.hpp"
#include "airtwin/game/policy.hpp"
#include "airtwin/scenario/scenario.hpp"
#include "airtwin/scenario/trace.hpp"

namespace airtwin::scenario {

struct HeadlessOptions {
  double duration_s = 0.0;
  /// Probe sampling period; rows at every multiple of it up to the duration.
  double sample_every_s = 60.0;
  /// Overrides the scenario seed.
  std::optional<std::uint64_t> seed;
  /// Scripted player driving the session; none leaves it to the schedules.
  std::optional<game::PolicyKind> policy;
};

struct HeadlessResult {
  Trace trace;
  game::EventLog log;
  /// Set when the solver faulted; the trace stops at the fault.
  std::optional<std::string> fault;
  std::optional<double> completed_at;
};

/// Steps a session without a client, sampling every probe of the layout.
/// Construction errors (invalid scenario, StabilityError during warm-up)
/// propagate; faults during the run are reported in the result.
HeadlessResult run_headless(const Scenario& scenario, const HeadlessOptions& options);

/// probes.csv and events.ndjson under dir (created if needed).
void write_outputs(const HeadlessResult& result, const std::filesystem::path& dir);

}  // namespace airtwin::scenario
