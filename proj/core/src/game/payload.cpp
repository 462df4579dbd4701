#include "airtwin/game/payload.hpp"

#include <cmath>

#include "airtwin/error.hpp"

namespace airtwin::game {

nlohmann::ordered_json reading_payload(const sensor::Reading& r) {
  nlohmann::ordered_json j;
  j["device_id"] = r.device_id;
  j["ts_ms"] = static_cast<std::int64_t>(std::llround(r.t * 1000.0));
  if (r.status == sensor::ReadingStatus::ok && r.co2_ppm) j["co2_ppm"] = *r.co2_ppm;
  j["temp_c"] = r.temp_c;
  j["rh_pct"] = r.rh_pct;
  j["status"] = std::string(sensor::to_string(r.status));
  return j;
}

std::string serialize_reading(const sensor::Reading& r) { return reading_payload(r).dump(); }

sensor::Reading parse_reading(const nlohmann::json& j) {
  try {
    sensor::Reading r;
    r.device_id = j.at("device_id").get<std::string>();
    r.t = static_cast<double>(j.at("ts_ms").get<std::int64_t>()) / 1000.0;
    r.temp_c = j.at("temp_c").get<double>();
    r.rh_pct = j.at("rh_pct").get<double>();
    const auto status = j.at("status").get<std::string>();
    if (status == "ok") {
      r.status = sensor::ReadingStatus::ok;
      r.co2_ppm = j.at("co2_ppm").get<double>();
    } else if (status == "warming") {
      r.status = sensor::ReadingStatus::warming;
    } else if (status == "out_of_range") {
      r.status = sensor::ReadingStatus::out_of_range;
    } else {
      throw InvalidArgument("unknown reading status '" + status + "'");
    }
    if (r.status != sensor::ReadingStatus::ok && j.contains("co2_ppm")) {
      throw InvalidArgument("co2_ppm present on a non-ok reading");
    }
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("bad reading payload: ") + e.what());
  }
}

nlohmann::json vec_json(const Vec3& v) { return nlohmann::json::array({v.x, v.y, v.z}); }

nlohmann::json bubble_json(const bubble::Bubble& b) {
  return {{"id", b.id},
          {"pos", vec_json(b.position)},
          {"ppm", b.last_ppm},
          {"diameter_m", b.style.diameter_m},
          {"hue_deg", b.style.hue_deg},
          {"opacity", b.style.opacity},
          {"placed_t", b.placed_t},
          {"updated_t", b.updated_t}};
}

nlohmann::json device_json(const sim::VentilationDevice& d) {
  return {{"id", d.id},
          {"kind", std::string(sim::to_string(d.kind))},
          {"pos", vec_json(d.position)},
          {"orientation", vec_json(d.orientation)},
          {"on", d.on}};
}

}  // namespace airtwin::game
