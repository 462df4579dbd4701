#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "airtwin/bubble/bubble.hpp"
#include "airtwin/game/command.hpp"
#include "airtwin/game/completion.hpp"
#include "airtwin/game/events.hpp"
#include "airtwin/game/heatmap.hpp"
#include "airtwin/game/metrics.hpp"
#include "airtwin/scenario/scenario.hpp"
#include "airtwin/sensor/virtual_sensor.hpp"
#include "airtwin/sim/field.hpp"
#include "airtwin/sim/flow.hpp"

namespace airtwin::game {

enum class Mode { ar_bubbles, heatmap_baseline };
std::string_view to_string(Mode mode);
/// Throws InvalidArgument for anything other than the two mode names.
Mode parse_mode(std::string_view text);

enum class SessionStatus { running, complete, aborted };
std::string_view to_string(SessionStatus status);

struct SessionOptions {
  std::string id = "s1";
  Mode mode = Mode::ar_bubbles;
  std::uint64_t seed = 0;
  /// Overrides the scenario's time_scale when set.
  std::optional<double> time_scale;
  /// Commands other than start are still accepted; the clock stands still.
  bool paused = false;
  sensor::SensorSpec sensor_spec;
};

/// One monitored point and where it is.
struct MonitoredPoint {
  std::string key;
  Vec3 position;
  /// Latest reported reading; +inf when none yet.
  double reported_ppm = 0.0;
};

/// A running ventilation game. The field is warmed up from t = -warmup_s
/// during construction; sensors power on at t = 0.
///
/// Owned by one thread. Commands go through submit() (validated and applied
/// immediately, between ticks) or enqueue() (applied at the next tick).
class Session {
 public:
  /// Throws InvalidArgument when the scenario does not fit the mode
  /// (baseline needs exactly six probe positions), ScenarioError when the
  /// scenario is invalid.
  Session(scenario::Scenario scenario, SessionOptions options);

  const std::string& id() const { return options_.id; }
  Mode mode() const { return options_.mode; }
  std::uint64_t seed() const { return options_.seed; }
  const scenario::Scenario& scenario() const { return scenario_; }
  const sim::RoomGeometry& geometry() const { return field_.geometry(); }

  SessionStatus status() const { return status_; }
  /// Stopped by command or by a fault; advance() does nothing afterwards.
  bool ended() const { return ended_; }
  bool paused() const { return paused_; }
  /// Neither ended nor aborted.
  bool running() const { return !ended_ && status_ != SessionStatus::aborted; }
  std::optional<double> completed_at() const { return completed_at_; }

  double t() const { return field_.t; }
  double dt() const { return scenario_.params.dt; }
  double time_scale() const { return time_scale_; }
  std::uint64_t ticks() const { return ticks_; }

  const sim::ConcentrationField& field() const { return field_; }
  std::span<const sim::VentilationDevice> devices() const { return devices_; }
  const sim::VentilationDevice* device(std::string_view id) const;
  const std::vector<bubble::Bubble>& bubbles() const { return bubbles_; }
  const Vec3& avatar() const { return avatar_; }
  Vec3 wrist() const { return avatar_ + scenario_.wearable.wrist_offset; }
  const std::optional<Vec3>& avatar_target() const { return avatar_target_; }

  /// The wearable in ar mode, the six static probes in baseline mode.
  const std::vector<sensor::VirtualSensor>& sensors() const { return sensors_; }
  const sensor::VirtualSensor* sensor(std::string_view id) const;
  /// Latest reading produced by a sensor at or before t().
  std::optional<sensor::Reading> latest_reading(std::string_view device_id) const;

  const EventLog& log() const { return log_; }
  const std::vector<MonitorSample>& monitor_samples() const { return monitor_samples_; }
  /// Throws InsufficientData with fewer than two monitored samples.
  SessionMetrics metrics() const { return session_metrics(monitor_samples_); }

  /// Bubbles ("b{id}") in ar mode, probes in baseline mode.
  std::vector<MonitoredPoint> monitored() const;
  /// True field concentration at each monitored point.
  std::vector<double> monitored_truth() const;

  /// Advances simulated time by wall_dt * time_scale in whole ticks of
  /// params.dt; the remainder carries over. Returns the number of ticks run.
  int advance(double wall_dt);
  /// Runs exactly n ticks regardless of time_scale.
  void run_ticks(int n);
  /// Runs whole ticks until t() >= until.
  void run_until(double until);

  /// Validates and applies a command now.
  CommandResult submit(const Command& command);
  /// Defers a command to the next tick boundary.
  void enqueue(Command command);
  /// Applies every queued command; rejections are logged.
  std::vector<CommandResult> apply_pending();

  /// Grid at the probe layout; label is G, T or C.
  HeatmapGrid heatmap(std::string_view height_label) const;

  /// Full state for clients: status, clock, avatar, devices, bubbles, readings.
  nlohmann::json snapshot() const;

 private:
  void tick();
  void apply_schedules(double t);
  void move_avatar(double dt);
  void poll_sensors();
  void record_monitor();
  void fail(const std::string& message);
  void end(const std::string& reason);
  void rebuild_flow();
  void emit(std::string kind, nlohmann::json payload);

  CommandResult apply(const Command& command);
  CommandResult apply_device(const Command& command, std::size_t index);
  CommandResult apply_session(const Command& command);
  CommandResult place_bubble();

  scenario::Scenario scenario_;
  SessionOptions options_;
  double time_scale_ = 1.0;
  sim::ConcentrationField field_;
  std::vector<sim::Source> sources_;
  std::vector<sim::VentilationDevice> devices_;
  std::vector<std::vector<sim::ActiveInterval>> schedules_;
  sim::FlowField flow_;
  std::vector<sensor::VirtualSensor> sensors_;
  std::vector<std::optional<sensor::Reading>> last_emitted_;
  std::vector<bubble::Bubble> bubbles_;
  std::map<int, nlohmann::json> bubble_shown_;
  int next_bubble_id_ = 1;
  Vec3 avatar_;
  std::optional<Vec3> avatar_target_;
  bubble::StalenessParams staleness_;
  CompletionTracker tracker_;
  EventLog log_;
  std::vector<MonitorSample> monitor_samples_;
  std::deque<Command> pending_;
  SessionStatus status_ = SessionStatus::running;
  std::optional<double> completed_at_;
  bool ended_ = false;
  bool paused_ = false;
  double accumulator_ = 0.0;
  std::uint64_t ticks_ = 0;
};

/// Session-level heatmap; throws InvalidArgument for a label other than G, T, C.
HeatmapGrid heatmap_snapshot(const Session& session, std::string_view height_label);

}  // namespace airtwin::game
