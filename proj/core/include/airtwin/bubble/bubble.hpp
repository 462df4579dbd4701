#pragma once

#include <span>
#include <vector>

#include "airtwin/sensor/virtual_sensor.hpp"
#include "airtwin/vec3.hpp"

namespace airtwin::bubble {

/// Visual state of one bubble. Hue is in degrees on the green (120) to red (0) arc.
struct BubbleStyle {
  double hue_deg = 120.0;
  double diameter_m = 0.2;
  double opacity = 1.0;
  bool operator==(const BubbleStyle&) const = default;
};

struct Bubble {
  int id = 0;
  Vec3 position;
  double last_ppm = 0.0;
  double placed_t = 0.0;
  double updated_t = 0.0;
  BubbleStyle style;
  bool operator==(const Bubble&) const = default;
};

struct HealthThresholds {
  double cognition_ppm = 1000.0;
  double symptoms_ppm = 2000.0;
  double session_target_ppm = 800.0;
};

/// Anchor points of the ppm -> style law.
inline constexpr double kLowPpm = 400.0;
inline constexpr double kHighPpm = 3000.0;
inline constexpr double kLowDiameterM = 0.2;
inline constexpr double kHighDiameterM = 1.5;
inline constexpr double kGreenHueDeg = 120.0;
inline constexpr double kRedHueDeg = 0.0;

/// Wearer-to-bubble distance within which a reading refreshes a bubble.
inline constexpr double kProximityM = 1.0;

struct StalenessParams {
  double half_life_s = 300.0;
  double floor = 0.15;
};

/// Diameter and hue linear in ppm between the 400 and 3000 ppm anchors,
/// clamped outside them; opacity 1.
BubbleStyle bubble_visual(double ppm);

/// max(floor, 0.5^(age / half_life)).
double staleness_opacity(double age_s, const StalenessParams& params = {});

/// Refreshes every bubble within 1 m of the wearer with an ok reading; the
/// others keep their reading and fade with age. Returns the ids refreshed.
std::vector<int> update_bubbles(std::vector<Bubble>& bubbles, const Vec3& wearer_position,
                                const sensor::Reading& reading, double now, const StalenessParams& params = {});

/// Re-evaluates staleness opacity without touching readings.
void fade_bubbles(std::vector<Bubble>& bubbles, double now, const StalenessParams& params = {});

/// Collapses bubbles whose centers lie within merge_radius_m of each other
/// into one at the centroid of the merged members, carrying the freshest
/// reading. The lowest id survives. Repeats until no pair is within the
/// radius, so the result is a fixed point. Output is ordered by id.
std::vector<Bubble> merge_bubbles(std::span<const Bubble> bubbles, double merge_radius_m);

}  // namespace airtwin::bubble
