#include "airtwin/game/policy.hpp"

#include <algorithm>
#include <cmath>

#include "airtwin/error.hpp"

namespace airtwin::game {
namespace {

constexpr double kArrivalTolM = 1e-6;

Command command(std::string target, Verb verb, nlohmann::json args = nlohmann::json::object()) {
  Command c;
  c.target = std::move(target);
  c.verb = verb;
  c.args = std::move(args);
  return c;
}

Vec3 floor_point(const Vec3& p) { return {p.x, p.y, 0.0}; }

double planar_distance(const Vec3& a, const Vec3& b) { return std::hypot(a.x - b.x, a.y - b.y); }

const sim::VentilationDevice* nearest(const Session& s, const Vec3& p, bool (*pred)(const sim::VentilationDevice&)) {
  const sim::VentilationDevice* best = nullptr;
  for (const auto& d : s.devices()) {
    if (!pred(d)) continue;
    if (!best || distance(d.position, p) < distance(best->position, p)) best = &d;
  }
  return best;
}

bool exchanger(const sim::VentilationDevice& d) { return sim::is_exchange(d.kind); }

bool mover(const sim::VentilationDevice& d) {
  return sim::is_directed(d.kind) && d.kind != sim::DeviceKind::split_ac && d.kind != sim::DeviceKind::ceiling_fan;
}

}  // namespace

std::string_view to_string(PolicyKind kind) { return kind == PolicyKind::informed ? "informed" : "uniform"; }

PolicyKind parse_policy(std::string_view text) {
  if (text == "informed") return PolicyKind::informed;
  if (text == "uniform") return PolicyKind::uniform;
  throw InvalidArgument("unknown policy '" + std::string(text) + "' (expected informed or uniform)");
}

ScriptedPlayer::ScriptedPlayer(PolicyKind kind, std::uint64_t seed, PlayerParams params)
    : kind_(kind), params_(params), rng_(seed) {}

bool ScriptedPlayer::go_to(Session& s, const Vec3& target) {
  if (planar_distance(s.avatar(), target) <= kArrivalTolM && !s.avatar_target()) {
    walking_ = false;
    return true;
  }
  if (!walking_) {
    walking_ = s.submit(command("session", Verb::move_avatar, {{"to", {target.x, target.y}}})).ok();
    return !walking_;
  }
  if (!s.avatar_target()) {
    // Stopped short: blocked on the way.
    walking_ = false;
    return true;
  }
  return false;
}

void ScriptedPlayer::act(Session& s) {
  if (!s.running() || s.mode() != Mode::ar_bubbles) return;
  if (phase_ == Phase::survey) {
    survey(s);
    if (phase_ == Phase::survey) return;
  }
  if (kind_ == PolicyKind::informed) {
    play_informed(s);
  } else {
    play_uniform(s);
  }
}

void ScriptedPlayer::survey(Session& s) {
  if (survey_points_.empty() && survey_index_ == 0) {
    for (const auto& p : s.scenario().session.survey_points) survey_points_.push_back(floor_point(p));
    if (survey_points_.empty()) {
      const auto& probes = s.scenario().probes;
      for (int r = 0; r < probes.rows; ++r) {
        for (int c = 0; c < probes.cols; ++c) {
          survey_points_.push_back(floor_point(probes.position(s.scenario().dims, r, c, scenario::HeightLayer::table)));
        }
      }
    }
  }
  if (survey_index_ >= survey_points_.size()) {
    phase_ = Phase::play;
    next_toggle_t_ = s.t();
    return;
  }
  if (!go_to(s, survey_points_[survey_index_])) return;
  if (!arrived_at_) arrived_at_ = s.t();
  const auto r = s.latest_reading(s.scenario().wearable.device_id);
  if (!r || r->status != sensor::ReadingStatus::ok || r->t < *arrived_at_ + params_.settle_s) return;
  s.submit(command("session", Verb::place_bubble));
  arrived_at_.reset();
  ++survey_index_;
}

void ScriptedPlayer::play_informed(Session& s) {
  const double target = s.scenario().session.target_ppm;
  const auto& bubbles = s.bubbles();
  auto focused = std::find_if(bubbles.begin(), bubbles.end(), [&](const auto& b) { return focus_ && b.id == *focus_; });
  if (focused == bubbles.end()) {
    focus_.reset();
    arrived_at_.reset();
    const bubble::Bubble* best = nullptr;
    std::size_t hot = 0;
    for (const auto& b : bubbles) hot += b.last_ppm > target ? 1 : 0;
    for (const auto& b : bubbles) {
      if (b.last_ppm <= target || (hot > 1 && last_visited_ && b.id == *last_visited_)) continue;
      if (!best || b.last_ppm > best->last_ppm ||
          (b.last_ppm == best->last_ppm &&
           planar_distance(b.position, s.avatar()) < planar_distance(best->position, s.avatar()))) {
        best = &b;
      }
    }
    if (!best) return;
    focus_ = best->id;
    walking_ = false;
    const auto* vent = nearest(s, best->position, exchanger);
    if (vent && !vent->on) s.submit(command(vent->id, Verb::set_state, {{"on", true}}));
    if (const auto* fan = nearest(s, best->position, mover)) {
      if (!fan->on) s.submit(command(fan->id, Verb::set_state, {{"on", true}}));
      const Vec3 aim_at = vent ? vent->position : best->position;
      if (norm(aim_at - fan->position) > 0.0) {
        s.submit(command(fan->id, Verb::aim, {{"toward", {aim_at.x, aim_at.y, aim_at.z}}}));
      }
    }
    focused = std::find_if(bubbles.begin(), bubbles.end(), [&](const auto& b) { return b.id == *focus_; });
  }
  if (!go_to(s, floor_point(focused->position))) return;
  if (!arrived_at_) arrived_at_ = s.t();
  // Stay long enough for the wearable to settle and refresh the bubble.
  if (s.t() >= *arrived_at_ + params_.settle_s + 5.0) {
    last_visited_ = focus_;
    focus_.reset();
    arrived_at_.reset();
  }
}

void ScriptedPlayer::play_uniform(Session& s) {
  const auto devices = s.devices();
  if (!devices.empty() && s.t() >= next_toggle_t_) {
    next_toggle_t_ = s.t() + params_.toggle_interval_s;
    std::uniform_int_distribution<std::size_t> pick(0, devices.size() - 1);
    const auto& d = devices[pick(rng_)];
    const std::string id = d.id;
    const bool turn_on = !d.on;
    const bool aimable = sim::is_directed(d.kind);
    s.submit(command(id, Verb::set_state, {{"on", turn_on}}));
    if (turn_on && aimable) {
      std::uniform_real_distribution<double> angle(0.0, 2.0 * 3.14159265358979323846);
      const double a = angle(rng_);
      s.submit(command(id, Verb::aim, {{"direction", {std::cos(a), std::sin(a), 0.0}}}));
    }
  }
  const auto& bubbles = s.bubbles();
  if (bubbles.empty()) return;
  const auto& b = bubbles[round_robin_ % bubbles.size()];
  if (!go_to(s, floor_point(b.position))) return;
  if (!arrived_at_) arrived_at_ = s.t();
  if (s.t() >= *arrived_at_ + params_.dwell_s) {
    arrived_at_.reset();
    ++round_robin_;
  }
}

PolicyResult run_policy(Session& session, PolicyKind kind, double horizon_s, std::uint64_t seed, PlayerParams params) {
  ScriptedPlayer player(kind, seed, params);
  while (session.running() && session.t() < horizon_s && !session.completed_at()) {
    player.act(session);
    session.run_ticks(1);
  }
  return {session.completed_at(), session.t()};
}

}  // namespace airtwin::game
