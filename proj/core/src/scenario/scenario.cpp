#include "airtwin/scenario/scenario.hpp"

#include <algorithm>
#include <cstdlib>
#include <set>

namespace airtwin::scenario {
namespace {

std::string vec_text(const Vec3& v) {
  return "(" + std::to_string(v.x) + ", " + std::to_string(v.y) + ", " + std::to_string(v.z) + ")";
}

void check_schedule(const std::vector<sim::ActiveInterval>& schedule, const std::string& field) {
  auto sorted = schedule;
  std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) { return a.on_s < b.on_s; });
  for (std::size_t n = 0; n < sorted.size(); ++n) {
    if (!(sorted[n].on_s < sorted[n].off_s)) {
      throw ScenarioError(field, 0, "schedule window must have on < off");
    }
    if (n > 0 && sorted[n].on_s < sorted[n - 1].off_s) {
      throw ScenarioError(field, 0, "schedule windows overlap");
    }
  }
}

void check_open_point(const sim::RoomGeometry& room, const Vec3& p, const std::string& field) {
  if (!room.contains(p)) throw ScenarioError(field, 0, "position " + vec_text(p) + " is outside the room");
  if (room.blocked(room.voxel_of(p))) {
    throw ScenarioError(field, 0, "position " + vec_text(p) + " is inside a blocked voxel");
  }
}

}  // namespace

ScenarioError::ScenarioError(std::string field, int line, const std::string& message)
    : Error((line > 0 ? "line " + std::to_string(line) + ": " : std::string()) + field + ": " + message),
      field_(std::move(field)),
      line_(line),
      reason_(message) {}

char label(HeightLayer layer) {
  switch (layer) {
    case HeightLayer::ground:
      return 'G';
    case HeightLayer::table:
      return 'T';
    case HeightLayer::ceiling:
      return 'C';
  }
  return '?';
}

HeightLayer parse_height(std::string_view text) {
  if (text == "G") return HeightLayer::ground;
  if (text == "T") return HeightLayer::table;
  if (text == "C") return HeightLayer::ceiling;
  throw InvalidArgument("unknown height label '" + std::string(text) + "' (expected G, T or C)");
}

double ProbeLayout::height(HeightLayer layer) const {
  switch (layer) {
    case HeightLayer::ground:
      return ground_m;
    case HeightLayer::table:
      return table_m;
    case HeightLayer::ceiling:
      return ceiling_m;
  }
  return table_m;
}

Vec3 ProbeLayout::position(const Vec3& dims, int row, int col, HeightLayer layer) const {
  return {(col + 0.5) * dims.x / cols, (row + 0.5) * dims.y / rows, height(layer)};
}

std::string ProbeLayout::probe_id(int row, int col, HeightLayer layer) {
  return "r" + std::to_string(row) + "c" + std::to_string(col) + "_" + label(layer);
}

sim::RoomGeometry Scenario::geometry() const {
  const sim::RoomGeometry open(dims, cell_m);
  std::set<sim::VoxelIndex> solid;
  for (const auto& box : blocked) {
    for (const auto& v : open.voxels_in(box)) solid.insert(v);
  }
  const std::vector<sim::VoxelIndex> list(solid.begin(), solid.end());
  return sim::RoomGeometry(dims, cell_m, list);
}

std::vector<sim::VentilationDevice> Scenario::build_devices(const sim::RoomGeometry& room) const {
  std::vector<sim::VentilationDevice> out;
  out.reserve(devices.size());
  for (const auto& entry : devices) {
    auto d = entry.device;
    if (entry.aperture_box) d.aperture = room.voxels_in(*entry.aperture_box);
    out.push_back(std::move(d));
  }
  return out;
}

void validate(const Scenario& s) {
  if (s.name.empty()) throw ScenarioError("name", 0, "scenario name is required");
  std::optional<sim::RoomGeometry> room;
  try {
    room.emplace(s.geometry());
  } catch (const InvalidArgument& e) {
    throw ScenarioError("room", 0, e.what());
  }
  try {
    sim::validate(s.params);
  } catch (const InvalidArgument& e) {
    throw ScenarioError("params", 0, e.what());
  }
  if (!(s.initial_ppm >= 0.0)) throw ScenarioError("params.initial_ppm", 0, "must be >= 0");
  if (!(s.warmup_s >= 0.0)) throw ScenarioError("params.warmup_s", 0, "must be >= 0");

  std::set<std::string> ids;
  for (std::size_t n = 0; n < s.sources.size(); ++n) {
    const auto& src = s.sources[n];
    const std::string field = "sources[" + std::to_string(n) + "]";
    if (src.id.empty()) throw ScenarioError(field + ".id", 0, "id is required");
    if (!ids.insert(src.id).second) throw ScenarioError(field + ".id", 0, "duplicate id '" + src.id + "'");
    check_open_point(*room, src.position, field + ".position");
    if (!(src.emission_rate >= 0.0)) throw ScenarioError(field + ".emission_rate", 0, "must be >= 0");
    check_schedule(src.schedule, field + ".schedule");
  }
  const auto devices = s.build_devices(*room);
  for (std::size_t n = 0; n < s.devices.size(); ++n) {
    const auto& d = devices[n];
    const std::string field = "devices[" + std::to_string(n) + "]";
    if (d.id.empty()) throw ScenarioError(field + ".id", 0, "id is required");
    if (!ids.insert(d.id).second) throw ScenarioError(field + ".id", 0, "duplicate id '" + d.id + "'");
    try {
      sim::validate(d, *room);
    } catch (const Error& e) {
      throw ScenarioError(field, 0, e.what());
    }
    if (s.devices[n].aperture_box && d.aperture.empty()) {
      throw ScenarioError(field + ".aperture", 0, "aperture box contains no voxel center");
    }
    check_schedule(s.devices[n].schedule, field + ".schedule");
  }

  const auto& p = s.probes;
  if (p.rows < 1 || p.cols < 1) throw ScenarioError("probes.grid", 0, "grid needs at least one row and column");
  for (int r = 0; r < p.rows; ++r) {
    for (int c = 0; c < p.cols; ++c) {
      for (auto layer : kAllLayers) {
        check_open_point(*room, p.position(s.dims, r, c, layer), "probes." + ProbeLayout::probe_id(r, c, layer));
      }
    }
  }
  for (std::size_t n = 0; n < p.baseline.size(); ++n) {
    check_open_point(*room, p.baseline[n], "probes.baseline[" + std::to_string(n) + "]");
  }

  const Vec3 wrist{s.wearable.spawn.x + s.wearable.wrist_offset.x, s.wearable.spawn.y + s.wearable.wrist_offset.y,
                   s.wearable.wrist_offset.z};
  if (s.wearable.device_id.empty()) throw ScenarioError("wearable.device_id", 0, "id is required");
  if (!ids.insert(s.wearable.device_id).second) {
    throw ScenarioError("wearable.device_id", 0, "duplicate id '" + s.wearable.device_id + "'");
  }
  check_open_point(*room, wrist, "wearable.spawn");

  const auto& rules = s.session;
  if (rules.mode != "ar_bubbles" && rules.mode != "heatmap_baseline") {
    throw ScenarioError("session.mode", 0, "mode must be ar_bubbles or heatmap_baseline");
  }
  if (!(rules.target_ppm > 0.0)) throw ScenarioError("session.target_ppm", 0, "must be positive");
  if (!(rules.sustain_s >= 0.0)) throw ScenarioError("session.sustain_s", 0, "must be >= 0");
  if (!(rules.merge_radius_m > 0.0)) throw ScenarioError("session.merge_radius_m", 0, "must be positive");
  if (!(rules.avatar_speed_m_s > 0.0)) throw ScenarioError("session.avatar_speed_m_s", 0, "must be positive");
  if (!(rules.staleness_half_life_s > 0.0)) {
    throw ScenarioError("session.staleness_half_life_s", 0, "must be positive");
  }
  for (std::size_t n = 0; n < rules.survey_points.size(); ++n) {
    const auto& sp = rules.survey_points[n];
    check_open_point(*room, {sp.x + s.wearable.wrist_offset.x, sp.y + s.wearable.wrist_offset.y,
                             s.wearable.wrist_offset.z},
                     "session.survey_points[" + std::to_string(n) + "]");
  }
}

std::filesystem::path bundled_dir() {
  if (const char* env = std::getenv("AIRTWIN_SCENARIO_DIR"); env && *env) return env;
  return AIRTWIN_DEFAULT_SCENARIO_DIR;
}

std::vector<std::string> bundled_names() {
  std::vector<std::string> names;
  std::error_code ec;
  for (const auto& entry : std::filesystem::directory_iterator(bundled_dir(), ec)) {
    if (entry.path().extension() == ".yaml") names.push_back(entry.path().stem().string());
  }
  std::sort(names.begin(), names.end());
  return names;
}

std::filesystem::path resolve(const std::string& name_or_path) {
  const std::filesystem::path direct(name_or_path);
  if (std::filesystem::is_regular_file(direct)) return direct;
  const auto bundled = bundled_dir() / (name_or_path + ".yaml");
  if (std::filesystem::is_regular_file(bundled)) return bundled;
  throw ScenarioError("scenario", 0, "no scenario file or bundled scenario named '" + name_or_path + "'");
}

}  // namespace airtwin::scenario
