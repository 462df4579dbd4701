#include "airtwin/sensor/virtual_sensor.hpp"

#include <algorithm>
#include <cmath>

#include "airtwin/error.hpp"

namespace airtwin::sensor {
namespace {

constexpr double kSecondsPerYear = 365.25 * 24.0 * 3600.0;
constexpr double kTruncationSd = 3.0;

}  // namespace

void validate(const SensorSpec& s) {
  const bool positive = s.range_min_ppm > 0 && s.range_max_ppm > 0 && s.accuracy_abs_ppm > 0 && s.accuracy_rel > 0 &&
                        s.repeatability_sd_ppm > 0 && s.preheat_s > 0 && s.poll_interval_s > 0 &&
                        s.drift_abs_ppm_per_year > 0 && s.drift_rel_per_year > 0 && s.response_tau_s > 0;
  if (!positive) throw InvalidArgument("sensor spec fields must be positive");
  if (!(s.range_min_ppm < s.range_max_ppm)) throw InvalidArgument("sensor range lower bound must be below upper");
}

std::string_view to_string(ReadingStatus status) {
  switch (status) {
    case ReadingStatus::ok:
      return "ok";
    case ReadingStatus::warming:
      return "warming";
    case ReadingStatus::out_of_range:
      return "out_of_range";
  }
  return "unknown";
}

VirtualSensor::VirtualSensor(std::string device_id, SensorSpec spec, const Vec3& position, double power_on_t,
                             double initial_ppm, double ambient_ppm, std::uint64_t seed, Ambience ambience)
    : device_id_(std::move(device_id)),
      spec_(spec),
      position_(position),
      power_on_t_(power_on_t),
      lagged_ppm_(std::max(0.0, initial_ppm)),
      ambience_(ambience),
      rng_(seed) {
  validate(spec_);
  // Draw both values unconditionally so toggling the bias keeps the noise stream.
  const double bound = spec_.accuracy_bound(ambient_ppm);
  const double u = std::uniform_real_distribution<double>(-bound, bound)(rng_);
  const double sign = std::uniform_real_distribution<double>(0.0, 1.0)(rng_);
  bias0_ppm_ = spec_.bias_enabled ? u : 0.0;
  drift_sign_ = sign < 0.5 ? -1.0 : 1.0;
}

void VirtualSensor::tick(double true_ppm, double dt) {
  if (!(dt > 0.0)) throw InvalidArgument("sensor tick needs dt > 0");
  if (!(true_ppm >= 0.0)) throw InvalidArgument("true concentration must be >= 0");
  lagged_ppm_ = true_ppm + (lagged_ppm_ - true_ppm) * std::exp(-dt / spec_.response_tau_s);
  elapsed_s_ += dt;
}

double VirtualSensor::bias_ppm() const {
  double bias = bias0_ppm_;
  if (spec_.bias_enabled && spec_.drift_enabled) {
    const double years = elapsed_s_ / kSecondsPerYear;
    bias += drift_sign_ * (spec_.drift_abs_ppm_per_year + spec_.drift_rel_per_year * lagged_ppm_) * years;
  }
  const double bound = spec_.accuracy_bound(lagged_ppm_);
  return std::clamp(bias, -bound, bound);
}

double VirtualSensor::truncated_normal(double sd) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  double z = gauss(rng_);
  while (std::abs(z) > kTruncationSd) z = gauss(rng_);
  return z * sd;
}

Reading VirtualSensor::read(double now) {
  if (!warmed_up(now)) {
    return Reading{device_id_, now, std::nullopt, ambience_.temp_c, ambience_.rh_pct, ReadingStatus::warming};
  }
  if (last_sample_ && now - last_sample_->t < spec_.poll_interval_s) return *last_sample_;

  Reading r;
  r.device_id = device_id_;
  r.t = now;
  double raw = lagged_ppm_ + bias_ppm();
  double temp = ambience_.temp_c;
  double rh = ambience_.rh_pct;
  if (spec_.noise_enabled) {
    raw += truncated_normal(spec_.repeatability_sd_ppm);
    temp += truncated_normal(spec_.temp_repeatability_c);
    rh += truncated_normal(spec_.rh_repeatability_pct);
  }
  r.temp_c = temp;
  r.rh_pct = std::clamp(rh, 0.0, 100.0);
  if (raw > spec_.range_max_ppm) {
    r.status = ReadingStatus::out_of_range;
  } else {
    r.status = ReadingStatus::ok;
    r.co2_ppm = std::max(raw, spec_.range_min_ppm);
  }
  last_sample_ = r;
  return r;
}

void VirtualSensor::set_position(const sim::RoomGeometry& room, const Vec3& p) {
  if (!room.contains(p)) throw OutOfRoom("sensor position outside the room");
  position_ = p;
}

}  // namespace airtwin::sensor
