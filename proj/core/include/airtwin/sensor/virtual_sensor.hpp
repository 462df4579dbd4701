#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <string_view>

#include "airtwin/sim/geometry.hpp"
#include "airtwin/vec3.hpp"

namespace airtwin::sensor {

/// Datasheet figures of the wrist sensor. Accuracy and drift are
/// "absolute + relative * value" envelopes.
struct SensorSpec {
  double range_min_ppm = 400.0;
  double range_max_ppm = 5000.0;
  double accuracy_abs_ppm = 40.0;
  double accuracy_rel = 0.05;
  double repeatability_sd_ppm = 10.0;
  double preheat_s = 60.0;
  double poll_interval_s = 5.0;
  double drift_abs_ppm_per_year = 5.0;
  double drift_rel_per_year = 0.005;
  /// First-order response constant; 3 tau is roughly the 30 s settle time.
  double response_tau_s = 10.0;
  double temp_repeatability_c = 0.1;
  double rh_repeatability_pct = 0.4;

  /// Toggles for the error model, all on for a faithful device.
  bool bias_enabled = true;
  bool noise_enabled = true;
  bool drift_enabled = true;

  double accuracy_bound(double ppm) const { return accuracy_abs_ppm + accuracy_rel * ppm; }
};

/// Throws InvalidArgument when a field is non-positive or the range is empty.
void validate(const SensorSpec& spec);

enum class ReadingStatus { ok, warming, out_of_range };
std::string_view to_string(ReadingStatus status);

struct Reading {
  std::string device_id;
  double t = 0.0;
  /// Present iff status == ok.
  std::optional<double> co2_ppm;
  double temp_c = 0.0;
  double rh_pct = 0.0;
  ReadingStatus status = ReadingStatus::warming;

  bool operator==(const Reading&) const = default;
};

/// Air conditions reported through the temperature/humidity channels.
struct Ambience {
  double temp_c = 25.0;
  double rh_pct = 50.0;
};

class VirtualSensor {
 public:
  /// Powers the sensor on at `power_on_t`. The lag state starts at
  /// `initial_ppm`; the per-instance bias is drawn from `seed` within
  /// +-(accuracy_abs + accuracy_rel * ambient_ppm).
  VirtualSensor(std::string device_id, SensorSpec spec, const Vec3& position, double power_on_t,
                double initial_ppm, double ambient_ppm, std::uint64_t seed, Ambience ambience = {});

  /// First-order lag toward `true_ppm`:
  ///   lagged <- true + (lagged - true) * exp(-dt / tau).
  /// Also advances the drift clock by dt.
  void tick(double true_ppm, double dt);

  /// Warming before power_on + preheat; the cached sample within one poll
  /// interval of the previous one; otherwise a fresh sample.
  Reading read(double now);

  /// Moves the wrist anchor; the lag state is kept. Throws OutOfRoom.
  void set_position(const sim::RoomGeometry& room, const Vec3& p);

  const std::string& device_id() const { return device_id_; }
  const SensorSpec& spec() const { return spec_; }
  const Vec3& position() const { return position_; }
  double power_on_t() const { return power_on_t_; }
  double lagged_ppm() const { return lagged_ppm_; }
  /// Current systematic offset, including drift accumulated so far.
  double bias_ppm() const;
  const std::optional<Reading>& last_sample() const { return last_sample_; }
  bool warmed_up(double now) const { return now - power_on_t_ >= spec_.preheat_s; }

 private:
  double truncated_normal(double sd);

  std::string device_id_;
  SensorSpec spec_;
  Vec3 position_;
  double power_on_t_;
  double lagged_ppm_;
  double bias0_ppm_ = 0.0;
  double drift_sign_ = 1.0;
  double elapsed_s_ = 0.0;
  Ambience ambience_;
  std::mt19937_64 rng_;
  std::optional<Reading> last_sample_;
};

}  // namespace airtwin::sensor
