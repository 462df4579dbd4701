#include "airtwin/game/session.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "airtwin/error.hpp"
#include "airtwin/game/payload.hpp"
#include "airtwin/sim/solver.hpp"

namespace airtwin::game {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr std::size_t kBaselineSensors = 6;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

std::uint64_t sensor_seed(std::uint64_t seed, std::size_t index) { return splitmix64(seed ^ splitmix64(index + 1)); }

sim::ConcentrationField warm_field(const scenario::Scenario& s) {
  scenario::validate(s);
  auto field = sim::init_field(std::make_shared<const sim::RoomGeometry>(s.geometry()), s.initial_ppm);
  field.t = -s.warmup_s;
  return field;
}

bool active_at(const std::vector<sim::ActiveInterval>& schedule, double t) {
  return std::any_of(schedule.begin(), schedule.end(), [t](const auto& iv) { return iv.on_s <= t && t < iv.off_s; });
}

std::optional<Vec3> vec_arg(const nlohmann::json& v, bool allow_2d) {
  if (!v.is_array() || !(v.size() == 3 || (allow_2d && v.size() == 2))) return std::nullopt;
  for (const auto& e : v) {
    if (!e.is_number() || !std::isfinite(e.get<double>())) return std::nullopt;
  }
  return Vec3{v[0].get<double>(), v[1].get<double>(), v.size() == 3 ? v[2].get<double>() : 0.0};
}

bool only_keys(const nlohmann::json& args, std::initializer_list<std::string_view> allowed) {
  for (const auto& [key, _] : args.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) return false;
  }
  return true;
}

CommandResult rejected(CommandStatus status, std::string message) { return {status, std::move(message), {}}; }

nlohmann::json reading_json(const sensor::Reading& r) { return nlohmann::json::parse(serialize_reading(r)); }

}  // namespace

std::string_view to_string(Mode mode) { return mode == Mode::ar_bubbles ? "ar_bubbles" : "heatmap_baseline"; }

Mode parse_mode(std::string_view text) {
  if (text == "ar_bubbles") return Mode::ar_bubbles;
  if (text == "heatmap_baseline") return Mode::heatmap_baseline;
  throw InvalidArgument("unknown mode '" + std::string(text) + "' (expected ar_bubbles or heatmap_baseline)");
}

std::string_view to_string(SessionStatus status) {
  switch (status) {
    case SessionStatus::running:
      return "running";
    case SessionStatus::complete:
      return "complete";
    case SessionStatus::aborted:
      return "aborted";
  }
  return "unknown";
}

Session::Session(scenario::Scenario scenario, SessionOptions options)
    : scenario_(std::move(scenario)),
      options_(std::move(options)),
      field_(warm_field(scenario_)),
      tracker_({scenario_.session.target_ppm, scenario_.session.sustain_s}) {
  if (options_.mode == Mode::heatmap_baseline && scenario_.probes.baseline.size() != kBaselineSensors) {
    throw InvalidArgument("heatmap_baseline mode needs exactly six probes.baseline positions, scenario '" +
                          scenario_.name + "' has " + std::to_string(scenario_.probes.baseline.size()));
  }
  time_scale_ = options_.time_scale.value_or(scenario_.params.time_scale);
  if (!(time_scale_ > 0.0) || !std::isfinite(time_scale_)) throw InvalidArgument("time_scale must be > 0");
  paused_ = options_.paused;
  staleness_.half_life_s = scenario_.session.staleness_half_life_s;

  sources_ = scenario_.sources;
  devices_ = scenario_.build_devices(field_.geometry());
  for (const auto& entry : scenario_.devices) schedules_.push_back(entry.schedule);
  rebuild_flow();

  const auto& params = scenario_.params;
  const auto warm_ticks = static_cast<long long>(std::llround(scenario_.warmup_s / params.dt));
  for (long long n = 0; n < warm_ticks; ++n) {
    apply_schedules(field_.t);
    sim::step_in_place(field_, sources_, devices_, flow_, params, params.dt);
  }
  field_.t = 0.0;
  apply_schedules(0.0);

  const Vec3 spawn = scenario_.wearable.spawn;
  avatar_ = {spawn.x, spawn.y, 0.0};
  const sensor::Ambience ambience{scenario_.session.temp_c, scenario_.session.rh_pct};
  const auto add_sensor = [&](std::string id, const Vec3& pos) {
    const std::size_t index = sensors_.size();
    sensors_.emplace_back(std::move(id), options_.sensor_spec, pos, 0.0, sim::sample(field_, pos), params.ambient_ppm,
                          sensor_seed(options_.seed, index), ambience);
  };
  if (options_.mode == Mode::ar_bubbles) {
    add_sensor(scenario_.wearable.device_id, wrist());
  } else {
    for (std::size_t n = 0; n < kBaselineSensors; ++n) {
      add_sensor("probe-" + std::to_string(n + 1), scenario_.probes.baseline[n]);
    }
  }
  last_emitted_.resize(sensors_.size());

  nlohmann::json devices = nlohmann::json::array();
  for (const auto& d : devices_) devices.push_back(device_json(d));
  nlohmann::json sensors = nlohmann::json::array();
  for (const auto& s : sensors_) sensors.push_back({{"id", s.device_id()}, {"pos", vec_json(s.position())}});
  emit("session_started", {{"session_id", options_.id},
                           {"scenario", scenario_.name},
                           {"mode", std::string(to_string(options_.mode))},
                           {"seed", options_.seed},
                           {"dt", params.dt},
                           {"time_scale", time_scale_},
                           {"warmup_s", scenario_.warmup_s},
                           {"target_ppm", scenario_.session.target_ppm},
                           {"sustain_s", scenario_.session.sustain_s},
                           {"avatar", vec_json(avatar_)},
                           {"wrist", vec_json(wrist())},
                           {"devices", devices},
                           {"sensors", sensors},
                           {"paused", paused_}});
  poll_sensors();
}

const sim::VentilationDevice* Session::device(std::string_view id) const {
  for (const auto& d : devices_) {
    if (d.id == id) return &d;
  }
  return nullptr;
}

const sensor::VirtualSensor* Session::sensor(std::string_view id) const {
  for (const auto& s : sensors_) {
    if (s.device_id() == id) return &s;
  }
  return nullptr;
}

std::optional<sensor::Reading> Session::latest_reading(std::string_view device_id) const {
  for (std::size_t n = 0; n < sensors_.size(); ++n) {
    if (sensors_[n].device_id() == device_id) return last_emitted_[n];
  }
  return std::nullopt;
}

std::vector<MonitoredPoint> Session::monitored() const {
  std::vector<MonitoredPoint> out;
  if (options_.mode == Mode::ar_bubbles) {
    for (const auto& b : bubbles_) out.push_back({"b" + std::to_string(b.id), b.position, b.last_ppm});
  } else {
    for (std::size_t n = 0; n < sensors_.size(); ++n) {
      const auto& r = last_emitted_[n];
      const double ppm = r && r->status == sensor::ReadingStatus::ok ? *r->co2_ppm : kInf;
      out.push_back({sensors_[n].device_id(), sensors_[n].position(), ppm});
    }
  }
  return out;
}

std::vector<double> Session::monitored_truth() const {
  std::vector<double> out;
  for (const auto& p : monitored()) out.push_back(sim::sample(field_, p.position));
  return out;
}

int Session::advance(double wall_dt) {
  if (!(wall_dt >= 0.0) || !std::isfinite(wall_dt)) throw InvalidArgument("advance needs a finite wall_dt >= 0");
  apply_pending();
  if (!running() || paused_) return 0;
  const double dt = scenario_.params.dt;
  accumulator_ += wall_dt * time_scale_;
  const auto n = static_cast<int>(std::floor(accumulator_ / dt + 1e-9));
  accumulator_ = std::max(0.0, accumulator_ - n * dt);
  int ran = 0;
  for (; ran < n && running() && !paused_; ++ran) tick();
  return ran;
}

void Session::run_ticks(int n) {
  for (int i = 0; i < n && running() && !paused_; ++i) tick();
}

void Session::run_until(double until) {
  while (field_.t < until - 1e-9 && running() && !paused_) tick();
}

void Session::tick() {
  apply_pending();
  if (!running() || paused_) return;
  const double dt = scenario_.params.dt;
  apply_schedules(field_.t);
  move_avatar(dt);
  try {
    sim::step_in_place(field_, sources_, devices_, flow_, scenario_.params, dt);
    for (auto& s : sensors_) {
      if (options_.mode == Mode::ar_bubbles) s.set_position(field_.geometry(), wrist());
      s.tick(sim::sample(field_, s.position()), dt);
    }
  } catch (const Error& e) {
    fail(e.what());
    return;
  }
  ++ticks_;
  poll_sensors();

  std::vector<MonitoredValue> values;
  for (const auto& p : monitored()) values.push_back({p.key, p.reported_ppm});
  if (tracker_.observe(field_.t, values) && !completed_at_) {
    completed_at_ = field_.t;
    status_ = SessionStatus::complete;
    emit("completion", {{"t", field_.t}, {"target_ppm", tracker_.rule().target_ppm},
                        {"sustain_s", tracker_.rule().sustain_s}, {"points", values.size()}});
  }
}

void Session::apply_schedules(double t) {
  bool changed = false;
  for (std::size_t n = 0; n < devices_.size(); ++n) {
    if (schedules_[n].empty()) continue;
    const bool on = active_at(schedules_[n], t);
    if (on == devices_[n].on) continue;
    devices_[n].on = on;
    changed = true;
    if (t >= 0.0) {
      auto payload = device_json(devices_[n]);
      payload["cause"] = "schedule";
      emit("device_state", std::move(payload));
    }
  }
  if (changed) rebuild_flow();
}

void Session::rebuild_flow() { flow_ = sim::FlowField(field_.geometry(), devices_); }

void Session::move_avatar(double dt) {
  if (!avatar_target_) return;
  const Vec3 d = *avatar_target_ - avatar_;
  const double dist = norm(d);
  const double reach = scenario_.session.avatar_speed_m_s * dt;
  const Vec3 next = dist <= reach ? *avatar_target_ : avatar_ + d * (reach / dist);
  const Vec3 w = next + scenario_.wearable.wrist_offset;
  const auto& room = field_.geometry();
  if (!room.contains(w) || room.blocked(room.voxel_of(w))) {
    avatar_target_.reset();
    emit("avatar", {{"pos", vec_json(avatar_)}, {"wrist", vec_json(wrist())}, {"moving", false}, {"blocked", true}});
    return;
  }
  avatar_ = next;
  if (dist <= reach) avatar_target_.reset();
  emit("avatar", {{"pos", vec_json(avatar_)}, {"wrist", vec_json(wrist())}, {"moving", avatar_target_.has_value()}});
}

void Session::poll_sensors() {
  const double now = field_.t;
  bool fresh_any = false;
  for (std::size_t n = 0; n < sensors_.size(); ++n) {
    const auto r = sensors_[n].read(now);
    auto& last = last_emitted_[n];
    const bool warming = r.status == sensor::ReadingStatus::warming;
    const bool changed = !last || last->status != r.status || (!warming && last->t != r.t);
    last = r;
    if (!changed) continue;
    emit("reading", reading_json(r));
    if (warming) continue;
    fresh_any = true;
    if (options_.mode == Mode::ar_bubbles && n == 0) {
      if (r.status == sensor::ReadingStatus::ok) {
        bubble::update_bubbles(bubbles_, wrist(), r, now, staleness_);
      }
      bubble::fade_bubbles(bubbles_, now, staleness_);
      for (const auto& b : bubbles_) {
        auto j = bubble_json(b);
        auto& shown = bubble_shown_[b.id];
        if (shown != j) {
          shown = j;
          emit("bubble", std::move(j));
        }
      }
    }
  }
  if (fresh_any) record_monitor();
}

void Session::record_monitor() {
  const auto points = monitored();
  if (points.empty()) return;
  double sum = 0.0;
  double max = 0.0;
  for (const auto& p : points) {
    if (!std::isfinite(p.reported_ppm)) return;
    sum += p.reported_ppm;
    max = std::max(max, p.reported_ppm);
  }
  const double avg = sum / static_cast<double>(points.size());
  monitor_samples_.push_back({field_.t, avg});
  emit("monitor", {{"avg_ppm", avg}, {"max_ppm", max}, {"points", points.size()}});
}

void Session::fail(const std::string& message) {
  status_ = SessionStatus::aborted;
  emit("fault", {{"message", message}});
  end("fault");
}

void Session::end(const std::string& reason) {
  if (ended_) return;
  ended_ = true;
  nlohmann::json payload{{"reason", reason}, {"status", std::string(to_string(status_))}};
  if (completed_at_) payload["completed_at"] = *completed_at_;
  if (monitor_samples_.size() >= 2) {
    const auto m = metrics();
    payload["metrics"] = {{"start_ppm", m.start_ppm},
                          {"end_ppm", m.end_ppm},
                          {"reduction_ppm", m.reduction_ppm},
                          {"duration_min", m.duration_min}};
    if (m.min_per_100ppm) payload["metrics"]["min_per_100ppm"] = *m.min_per_100ppm;
  }
  emit("session_ended", std::move(payload));
}

void Session::emit(std::string kind, nlohmann::json payload) { log_.append(field_.t, std::move(kind), std::move(payload)); }

CommandResult Session::submit(const Command& command) { return apply(command); }

void Session::enqueue(Command command) { pending_.push_back(std::move(command)); }

std::vector<CommandResult> Session::apply_pending() {
  std::vector<CommandResult> results;
  while (!pending_.empty()) {
    const Command cmd = std::move(pending_.front());
    pending_.pop_front();
    results.push_back(apply(cmd));
  }
  return results;
}

CommandResult Session::apply(const Command& cmd) {
  CommandResult result = [&] {
    if (!cmd.session_id.empty() && cmd.session_id != options_.id) {
      return rejected(CommandStatus::unknown_target, "unknown session '" + cmd.session_id + "'");
    }
    const bool session_target = cmd.target == "session" || cmd.target == options_.id;
    std::optional<std::size_t> device_index;
    for (std::size_t n = 0; n < devices_.size(); ++n) {
      if (devices_[n].id == cmd.target) device_index = n;
    }
    if (!session_target && !device_index) {
      const bool is_bubble =
          std::any_of(bubbles_.begin(), bubbles_.end(), [&](const auto& b) { return "b" + std::to_string(b.id) == cmd.target; });
      const bool is_source =
          std::any_of(sources_.begin(), sources_.end(), [&](const auto& s) { return s.id == cmd.target; });
      const bool is_sensor = sensor(cmd.target) != nullptr || cmd.target == scenario_.wearable.device_id;
      if (is_bubble || is_source || is_sensor) {
        return rejected(CommandStatus::invalid_for_target,
                        "'" + std::string(to_string(cmd.verb)) + "' does not apply to '" + cmd.target + "'");
      }
      return rejected(CommandStatus::unknown_target, "unknown target '" + cmd.target + "'");
    }
    if (ended_) return rejected(CommandStatus::invalid_for_target, "session has ended");
    if (!cmd.args.is_object()) return rejected(CommandStatus::malformed, "'args' must be an object");
    return device_index ? apply_device(cmd, *device_index) : apply_session(cmd);
  }();
  if (!result.ok()) {
    emit("command_rejected", {{"target", cmd.target},
                              {"verb", std::string(to_string(cmd.verb))},
                              {"status", http_status(result.status)},
                              {"message", result.message}});
  }
  return result;
}

CommandResult Session::apply_device(const Command& cmd, std::size_t index) {
  auto& d = devices_[index];
  switch (cmd.verb) {
    case Verb::set_state: {
      if (!only_keys(cmd.args, {"on"}) || !cmd.args.contains("on") || !cmd.args["on"].is_boolean()) {
        return rejected(CommandStatus::malformed, "set_state needs args {\"on\": bool}");
      }
      d.on = cmd.args["on"].get<bool>();
      schedules_[index].clear();
      break;
    }
    case Verb::aim: {
      if (!sim::is_directed(d.kind)) {
        return rejected(CommandStatus::invalid_for_target,
                        "'" + d.id + "' (" + std::string(sim::to_string(d.kind)) + ") cannot be aimed");
      }
      const bool has_dir = cmd.args.contains("direction");
      const bool has_toward = cmd.args.contains("toward");
      if (!only_keys(cmd.args, {"direction", "toward"}) || has_dir == has_toward) {
        return rejected(CommandStatus::malformed, "aim needs exactly one of args.direction or args.toward");
      }
      const auto v = vec_arg(has_dir ? cmd.args["direction"] : cmd.args["toward"], false);
      if (!v) return rejected(CommandStatus::malformed, "aim vector must be three finite numbers");
      const Vec3 dir = has_dir ? *v : *v - d.position;
      const double len = norm(dir);
      if (!(len > 0.0) || !std::isfinite(len)) return rejected(CommandStatus::malformed, "aim vector has zero length");
      d.orientation = dir * (1.0 / len);
      break;
    }
    default:
      return rejected(CommandStatus::invalid_for_target,
                      "'" + std::string(to_string(cmd.verb)) + "' does not apply to device '" + d.id + "'");
  }
  rebuild_flow();
  auto state = device_json(d);
  auto payload = state;
  payload["cause"] = "command";
  emit("device_state", std::move(payload));
  return {CommandStatus::accepted, {}, std::move(state)};
}

CommandResult Session::apply_session(const Command& cmd) {
  switch (cmd.verb) {
    case Verb::start:
      if (!cmd.args.empty()) return rejected(CommandStatus::malformed, "start takes no args");
      if (paused_) {
        paused_ = false;
        emit("session_state", {{"paused", false}});
      }
      return {CommandStatus::accepted, {}, {{"paused", false}, {"t", field_.t}}};
    case Verb::stop:
      if (!cmd.args.empty()) return rejected(CommandStatus::malformed, "stop takes no args");
      end("stopped");
      return {CommandStatus::accepted, {}, {{"ended", true}, {"t", field_.t}}};
    case Verb::move_avatar: {
      if (!only_keys(cmd.args, {"to"}) || !cmd.args.contains("to")) {
        return rejected(CommandStatus::malformed, "move_avatar needs args {\"to\": [x, y] or [x, y, z]}");
      }
      const auto to = vec_arg(cmd.args["to"], true);
      if (!to) return rejected(CommandStatus::malformed, "move_avatar target must be 2 or 3 finite numbers");
      const auto& room = field_.geometry();
      const Vec3 w = *to + scenario_.wearable.wrist_offset;
      if (to->z < 0.0 || !room.contains(*to) || !room.contains(w) || room.blocked(room.voxel_of(w))) {
        return rejected(CommandStatus::malformed, "move_avatar target is outside the room or inside an obstacle");
      }
      avatar_target_ = *to;
      return {CommandStatus::accepted, {}, {{"avatar", vec_json(avatar_)}, {"target", vec_json(*to)}}};
    }
    case Verb::place_bubble:
      if (!cmd.args.empty()) return rejected(CommandStatus::malformed, "place_bubble takes no args");
      return place_bubble();
    default:
      return rejected(CommandStatus::invalid_for_target,
                      "'" + std::string(to_string(cmd.verb)) + "' does not apply to the session");
  }
}

CommandResult Session::place_bubble() {
  if (options_.mode != Mode::ar_bubbles) {
    return rejected(CommandStatus::invalid_for_target, "bubbles are not available in heatmap_baseline mode");
  }
  const auto& r = last_emitted_.front();
  if (!r || r->status != sensor::ReadingStatus::ok) {
    return rejected(CommandStatus::invalid_for_target, "the wearable has no valid reading yet");
  }
  bubble::Bubble b;
  b.id = next_bubble_id_++;
  b.position = wrist();
  b.last_ppm = *r->co2_ppm;
  b.placed_t = field_.t;
  b.updated_t = r->t;
  b.style = bubble::bubble_visual(b.last_ppm);
  b.style.opacity = bubble::staleness_opacity(field_.t - b.updated_t, staleness_);
  // Keep updated_t >= placed_t: the placing reading counts as fresh.
  b.updated_t = std::max(b.updated_t, b.placed_t);

  std::vector<bubble::Bubble> all = bubbles_;
  all.push_back(b);
  auto merged = bubble::merge_bubbles(all, scenario_.session.merge_radius_m);

  std::vector<int> removed;
  for (const auto& old : all) {
    if (std::none_of(merged.begin(), merged.end(), [&](const auto& m) { return m.id == old.id; })) {
      removed.push_back(old.id);
    }
  }
  bubbles_ = std::move(merged);
  for (int id : removed) bubble_shown_.erase(id);
  if (!removed.empty()) emit("bubble_merged", {{"removed", removed}});
  for (const auto& m : bubbles_) {
    auto j = bubble_json(m);
    auto& shown = bubble_shown_[m.id];
    if (shown != j) {
      shown = j;
      emit("bubble", std::move(j));
    }
  }
  const auto nearest = std::min_element(bubbles_.begin(), bubbles_.end(), [&](const auto& a, const auto& c) {
    return distance(a.position, b.position) < distance(c.position, b.position);
  });
  return {CommandStatus::accepted, {}, bubble_json(*nearest)};
}

HeatmapGrid Session::heatmap(std::string_view height_label) const {
  return heatmap_snapshot(field_, scenario_.probes, scenario::parse_height(height_label));
}

nlohmann::json Session::snapshot() const {
  nlohmann::json devices = nlohmann::json::array();
  for (const auto& d : devices_) devices.push_back(device_json(d));
  nlohmann::json bubbles = nlohmann::json::array();
  for (const auto& b : bubbles_) bubbles.push_back(bubble_json(b));
  nlohmann::json readings = nlohmann::json::array();
  for (const auto& r : last_emitted_) {
    if (r) readings.push_back(reading_json(*r));
  }
  nlohmann::json monitored_points = nlohmann::json::array();
  for (const auto& p : monitored()) {
    monitored_points.push_back({{"key", p.key},
                                {"pos", vec_json(p.position)},
                                {"ppm", std::isfinite(p.reported_ppm) ? nlohmann::json(p.reported_ppm) : nlohmann::json()}});
  }
  return {{"id", options_.id},
          {"scenario", scenario_.name},
          {"mode", std::string(to_string(options_.mode))},
          {"status", std::string(to_string(status_))},
          {"ended", ended_},
          {"paused", paused_},
          {"t", field_.t},
          {"time_scale", time_scale_},
          {"target_ppm", scenario_.session.target_ppm},
          {"completed_at", completed_at_ ? nlohmann::json(*completed_at_) : nlohmann::json()},
          {"avatar", vec_json(avatar_)},
          {"wrist", vec_json(wrist())},
          {"avatar_target", avatar_target_ ? vec_json(*avatar_target_) : nlohmann::json()},
          {"devices", devices},
          {"bubbles", bubbles},
          {"readings", readings},
          {"monitored", monitored_points},
          {"last_seq", log_.last_seq()}};
}

HeatmapGrid heatmap_snapshot(const Session& session, std::string_view height_label) {
  return session.heatmap(height_label);
}

}  // namespace airtwin::game
