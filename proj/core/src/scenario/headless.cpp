#include "airtwin/scenario/headless.hpp"

#include <cmath>
#include <fstream>

#include "airtwin/error.hpp"

namespace airtwin::scenario {

HeadlessResult run_headless(const Scenario& scenario, const HeadlessOptions& options) {
  if (!(options.duration_s >= 0.0)) throw InvalidArgument("duration must be >= 0");
  if (!(options.sample_every_s > 0.0)) throw InvalidArgument("sample period must be > 0");

  game::SessionOptions so;
  so.id = scenario.name;
  so.mode = game::parse_mode(scenario.session.mode);
  so.seed = options.seed.value_or(scenario.seed);
  game::Session session(scenario, so);
  std::optional<game::ScriptedPlayer> player;
  if (options.policy) player.emplace(*options.policy, so.seed);

  HeadlessResult result;
  result.trace.columns = Trace::probe_columns(scenario.probes);
  const double every = options.sample_every_s;
  const auto samples = static_cast<long long>(std::floor(options.duration_s / every + 1e-9));
  for (long long n = 1; n <= samples + 1; ++n) {
    const double until = n <= samples ? static_cast<double>(n) * every : options.duration_s;
    if (until <= session.t() + 1e-9) break;
    while (session.t() < until - 1e-9 && session.running()) {
      if (player) player->act(session);
      session.run_ticks(1);
    }
    if (!session.running()) break;
    result.trace.sample(session.field(), scenario.probes);
  }
  if (session.status() == game::SessionStatus::aborted) {
    for (const auto& e : session.log().events()) {
      if (e.kind == "fault") result.fault = e.payload.value("message", std::string("solver fault"));
    }
  }
  result.completed_at = session.completed_at();
  result.log = session.log();
  return result;
}

void write_outputs(const HeadlessResult& result, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_trace_csv(result.trace, dir / "probes.csv");
  std::ofstream events(dir / "events.ndjson");
  if (!events) throw Error("cannot write " + (dir / "events.ndjson").string());
  events << result.log.to_ndjson();
}

}  // namespace airtwin::scenario
