#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <string_view>
#include <vector>

#include "airtwin/game/session.hpp"

namespace airtwin::game {

/// Scripted players used to compare gameplay strategies headlessly.
///   informed: acts on the hottest bubble above target (ventilator on, fan
///             aimed from the bubble toward it), waits there for a fresh
///             reading, then moves on to the next bubble above target.
///   uniform:  toggles a random device every minute with a random aim and
///             walks the bubbles round-robin.
/// Both first survey the room, placing a bubble at each survey point.
enum class PolicyKind { informed, uniform };
std::string_view to_string(PolicyKind kind);
/// Throws InvalidArgument for anything other than informed or uniform.
PolicyKind parse_policy(std::string_view text);

struct PlayerParams {
  /// Wait after arriving before trusting the wearable (about 3 tau).
  double settle_s = 30.0;
  /// Uniform player: seconds between random device toggles.
  double toggle_interval_s = 60.0;
  /// Uniform player: seconds spent at each bubble.
  double dwell_s = 30.0;
};

class ScriptedPlayer {
 public:
  ScriptedPlayer(PolicyKind kind, std::uint64_t seed, PlayerParams params = {});

  /// Issues this tick's commands. Call between ticks.
  void act(Session& session);
  bool surveying() const { return phase_ == Phase::survey; }

 private:
  enum class Phase { survey, play };

  void survey(Session& s);
  void play_informed(Session& s);
  void play_uniform(Session& s);
  bool go_to(Session& s, const Vec3& floor_point);

  PolicyKind kind_;
  PlayerParams params_;
  std::mt19937_64 rng_;
  Phase phase_ = Phase::survey;
  std::vector<Vec3> survey_points_;
  std::size_t survey_index_ = 0;
  bool walking_ = false;
  std::optional<double> arrived_at_;
  std::optional<int> focus_;
  std::optional<int> last_visited_;
  std::size_t round_robin_ = 0;
  double next_toggle_t_ = 0.0;
};

struct PolicyResult {
  std::optional<double> completed_at;
  double end_t = 0.0;
  /// Completion time, +inf when the session never completed.
  double time_to_complete() const { return completed_at.value_or(std::numeric_limits<double>::infinity()); }
};

/// Drives the session with a scripted player until completion, the end of the
/// session, or t >= horizon_s.
PolicyResult run_policy(Session& session, PolicyKind kind, double horizon_s, std::uint64_t seed,
                        PlayerParams params = {});

}  // namespace airtwin::game
