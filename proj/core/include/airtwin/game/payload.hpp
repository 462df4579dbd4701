#pragma once

#include <string>

#include <nlohmann/json.hpp>

#include "airtwin/bubble/bubble.hpp"
#include "airtwin/sensor/virtual_sensor.hpp"
#include "airtwin/sim/flow.hpp"

namespace airtwin::game {

/// Wire form of a sensor reading:
///   {"device_id", "ts_ms", "co2_ppm" (ok only), "temp_c", "rh_pct", "status"}
/// in that key order. ts_ms is simulated milliseconds, rounded.
nlohmann::ordered_json reading_payload(const sensor::Reading& reading);
std::string serialize_reading(const sensor::Reading& reading);
/// Inverse of reading_payload. Throws InvalidArgument on a bad document.
sensor::Reading parse_reading(const nlohmann::json& payload);

/// {id, pos, ppm, diameter_m, hue_deg, opacity, updated_t}
nlohmann::json bubble_json(const bubble::Bubble& b);
nlohmann::json device_json(const sim::VentilationDevice& d);
nlohmann::json vec_json(const Vec3& v);

}  // namespace airtwin::game
