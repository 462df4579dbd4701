#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "airtwin/error.hpp"
#include "airtwin/sim/flow.hpp"
#include "airtwin/sim/solver.hpp"

namespace airtwin::scenario {

/// Load or validation failure. `field` is a path such as "sources[2].position";
/// `line` is 1-based, 0 when unknown.
class ScenarioError : public Error {
 public:
  ScenarioError(std::string field, int line, const std::string& message);
  const std::string& field() const { return field_; }
  int line() const { return line_; }
  const std::string& reason() const { return reason_; }

 private:
  std::string field_;
  int line_;
  std::string reason_;
};

enum class HeightLayer { ground, table, ceiling };
/// "G", "T" or "C".
char label(HeightLayer layer);
/// Throws InvalidArgument for anything other than G, T or C.
HeightLayer parse_height(std::string_view text);
inline constexpr HeightLayer kAllLayers[] = {HeightLayer::ground, HeightLayer::table, HeightLayer::ceiling};

/// Grid of probe columns spread evenly over the floor plan, sampled at three
/// heights, plus the optional static sensors of the heatmap baseline.
struct ProbeLayout {
  int rows = 3;
  int cols = 3;
  double ground_m = 0.1;
  double table_m = 0.75;
  double ceiling_m = 2.4;
  std::vector<Vec3> baseline;

  double height(HeightLayer layer) const;
  /// Row r runs along y, column c along x; cell centers of an even split.
  Vec3 position(const Vec3& dims, int row, int col, HeightLayer layer) const;
  /// "r{row}c{col}_{G|T|C}".
  static std::string probe_id(int row, int col, HeightLayer layer);
  bool operator==(const ProbeLayout&) const = default;
};

struct DeviceEntry {
  sim::VentilationDevice device;
  /// Aperture as a box; voxels whose centers fall inside it.
  std::optional<sim::Box> aperture_box;
  /// When non-empty the device is on exactly inside these windows.
  std::vector<sim::ActiveInterval> schedule;
  bool operator==(const DeviceEntry&) const = default;
};

struct WearableConfig {
  std::string device_id = "wrist-1";
  /// Avatar floor position at session start (z ignored).
  Vec3 spawn;
  Vec3 wrist_offset{0.0, 0.0, 0.75};
  bool operator==(const WearableConfig&) const = default;
};

struct SessionRules {
  std::string mode = "ar_bubbles";
  double target_ppm = 800.0;
  double sustain_s = 60.0;
  double merge_radius_m = 0.5;
  double avatar_speed_m_s = 1.5;
  double staleness_half_life_s = 300.0;
  double temp_c = 25.0;
  double rh_pct = 50.0;
  /// Floor positions where scripted players place bubbles.
  std::vector<Vec3> survey_points;
  bool operator==(const SessionRules&) const = default;
};

struct Scenario {
  std::string name;
  std::string notes;
  Vec3 dims;
  double cell_m = 0.5;
  std::vector<sim::Box> blocked;
  sim::SimParams params;
  double initial_ppm = 400.0;
  /// Simulated seconds run before the session clock starts at t = 0.
  /// Schedules are in session time, so warm-up activity uses negative times.
  double warmup_s = 0.0;
  std::vector<sim::Source> sources;
  std::vector<DeviceEntry> devices;
  ProbeLayout probes;
  WearableConfig wearable;
  SessionRules session;
  std::uint64_t seed = 0;

  sim::RoomGeometry geometry() const;
  /// Devices with apertures resolved against the geometry.
  std::vector<sim::VentilationDevice> build_devices(const sim::RoomGeometry& room) const;

  bool operator==(const Scenario&) const = default;
};

/// Throws ScenarioError naming the violated invariant.
void validate(const Scenario& scenario);

/// Parses and validates a scenario file. Unknown keys are rejected.
Scenario load_scenario(const std::filesystem::path& path);
Scenario parse_scenario(const std::string& text, const std::string& origin = "<string>");
std::string serialize(const Scenario& scenario);
void save_scenario(const Scenario& scenario, const std::filesystem::path& path);

/// Directory of the bundled scenarios (AIRTWIN_SCENARIO_DIR overrides).
std::filesystem::path bundled_dir();
std::vector<std::string> bundled_names();
/// Accepts an existing path, or a bundled scenario name such as "R1".
std::filesystem::path resolve(const std::string& name_or_path);

}  // namespace airtwin::scenario
