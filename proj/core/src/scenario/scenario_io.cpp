#include <yaml-cpp/yaml.h>

#include <charconv>
#include <fstream>
#include <initializer_list>
#include <map>
#include <set>
#include <sstream>

#include "airtwin/scenario/scenario.hpp"

namespace airtwin::scenario {
namespace {

int line_of(const YAML::Node& node) { return node.Mark().line >= 0 ? node.Mark().line + 1 : 0; }

/// Walks the YAML tree, tracking the dotted path and source line of every
/// field read so validation errors can point back into the file.
class Reader {
 public:
  std::map<std::string, int> lines;

  void expect_map(const YAML::Node& node, const std::string& path, std::initializer_list<std::string_view> allowed) {
    if (!node.IsMap()) throw ScenarioError(path, line_of(node), "expected a mapping");
    lines.emplace(path, line_of(node));
    for (const auto& kv : node) {
      const auto key = kv.first.as<std::string>();
      bool known = false;
      for (auto a : allowed) known = known || a == key;
      const std::string field = path.empty() ? key : path + "." + key;
      if (!known) throw ScenarioError(field, line_of(kv.first), "unknown key '" + key + "'");
      lines.emplace(field, line_of(kv.first));
    }
  }

  template <typename T>
  T get(const YAML::Node& node, const std::string& path) {
    try {
      return node.as<T>();
    } catch (const YAML::Exception&) {
      throw ScenarioError(path, line_of(node), "cannot read value '" + scalar_text(node) + "'");
    }
  }

  template <typename T>
  void opt(const YAML::Node& parent, const char* key, const std::string& path, T& out) {
    if (const auto n = parent[key]) out = get<T>(n, join(path, key));
  }

  template <typename T>
  T req(const YAML::Node& parent, const char* key, const std::string& path) {
    const auto n = parent[key];
    if (!n) throw ScenarioError(join(path, key), line_of(parent), "missing required key");
    return get<T>(n, join(path, key));
  }

  Vec3 vec(const YAML::Node& node, const std::string& path, bool allow_2d = false) {
    if (!node.IsSequence() || (node.size() != 3 && !(allow_2d && node.size() == 2))) {
      throw ScenarioError(path, line_of(node), allow_2d ? "expected [x, y] or [x, y, z]" : "expected [x, y, z]");
    }
    Vec3 v{get<double>(node[0], path), get<double>(node[1], path), 0.0};
    if (node.size() == 3) v.z = get<double>(node[2], path);
    return v;
  }

  sim::Box box(const YAML::Node& node, const std::string& path) {
    expect_map(node, path, {"min", "max"});
    if (!node["min"] || !node["max"]) throw ScenarioError(path, line_of(node), "box needs min and max");
    return {vec(node["min"], path + ".min"), vec(node["max"], path + ".max")};
  }

  std::vector<sim::ActiveInterval> schedule(const YAML::Node& node, const std::string& path) {
    if (!node.IsSequence()) throw ScenarioError(path, line_of(node), "expected a list of [on_s, off_s]");
    std::vector<sim::ActiveInterval> out;
    for (const auto& w : node) {
      if (!w.IsSequence() || w.size() != 2) throw ScenarioError(path, line_of(w), "expected [on_s, off_s]");
      out.push_back({get<double>(w[0], path), get<double>(w[1], path)});
    }
    return out;
  }

  static std::string join(const std::string& path, const char* key) {
    return path.empty() ? std::string(key) : path + "." + key;
  }

 private:
  static std::string scalar_text(const YAML::Node& node) {
    if (node.IsScalar()) return node.Scalar();
    return "<non-scalar>";
  }
};

Scenario read(const YAML::Node& root, Reader& r) {
  Scenario s;
  r.expect_map(root, "", {"name", "notes", "room", "params", "sources", "devices", "probes", "wearable", "session",
                          "seed"});
  s.name = r.req<std::string>(root, "name", "");
  r.opt(root, "notes", "", s.notes);
  r.opt(root, "seed", "", s.seed);

  const auto room = root["room"];
  if (!room) throw ScenarioError("room", line_of(root), "missing required key");
  r.expect_map(room, "room", {"dims_m", "cell_m", "blocked"});
  if (!room["dims_m"]) throw ScenarioError("room.dims_m", line_of(room), "missing required key");
  s.dims = r.vec(room["dims_m"], "room.dims_m");
  r.opt(room, "cell_m", "room", s.cell_m);
  if (const auto blocked = room["blocked"]) {
    if (!blocked.IsSequence()) throw ScenarioError("room.blocked", line_of(blocked), "expected a list of boxes");
    for (std::size_t n = 0; n < blocked.size(); ++n) {
      s.blocked.push_back(r.box(blocked[n], "room.blocked[" + std::to_string(n) + "]"));
    }
  }

  if (const auto p = root["params"]) {
    r.expect_map(p, "params",
                 {"molecular_diffusivity", "turbulent_diffusivity", "settling_velocity", "ambient_ppm", "initial_ppm",
                  "warmup_s", "dt", "time_scale", "emission_scale", "allow_substeps"});
    r.opt(p, "molecular_diffusivity", "params", s.params.molecular_diffusivity);
    r.opt(p, "turbulent_diffusivity", "params", s.params.turbulent_diffusivity);
    r.opt(p, "settling_velocity", "params", s.params.settling_velocity);
    r.opt(p, "ambient_ppm", "params", s.params.ambient_ppm);
    s.initial_ppm = s.params.ambient_ppm;
    r.opt(p, "initial_ppm", "params", s.initial_ppm);
    r.opt(p, "warmup_s", "params", s.warmup_s);
    r.opt(p, "dt", "params", s.params.dt);
    r.opt(p, "time_scale", "params", s.params.time_scale);
    r.opt(p, "emission_scale", "params", s.params.emission_scale);
    r.opt(p, "allow_substeps", "params", s.params.allow_substeps);
  } else {
    s.initial_ppm = s.params.ambient_ppm;
  }

  if (const auto sources = root["sources"]) {
    if (!sources.IsSequence()) throw ScenarioError("sources", line_of(sources), "expected a list");
    for (std::size_t n = 0; n < sources.size(); ++n) {
      const auto node = sources[n];
      const std::string path = "sources[" + std::to_string(n) + "]";
      r.expect_map(node, path, {"id", "kind", "position", "emission_rate", "schedule"});
      sim::Source src;
      src.id = r.req<std::string>(node, "id", path);
      try {
        src.kind = sim::parse_source_kind(r.req<std::string>(node, "kind", path));
      } catch (const InvalidArgument& e) {
        throw ScenarioError(path + ".kind", line_of(node["kind"]), e.what());
      }
      if (!node["position"]) throw ScenarioError(path + ".position", line_of(node), "missing required key");
      src.position = r.vec(node["position"], path + ".position");
      src.emission_rate = sim::default_emission_rate(src.kind);
      r.opt(node, "emission_rate", path, src.emission_rate);
      if (const auto sch = node["schedule"]) src.schedule = r.schedule(sch, path + ".schedule");
      s.sources.push_back(std::move(src));
    }
  }

  if (const auto devices = root["devices"]) {
    if (!devices.IsSequence()) throw ScenarioError("devices", line_of(devices), "expected a list");
    for (std::size_t n = 0; n < devices.size(); ++n) {
      const auto node = devices[n];
      const std::string path = "devices[" + std::to_string(n) + "]";
      r.expect_map(node, path,
                   {"id", "kind", "position", "orientation", "aim_at", "on", "jet", "exchange_rate", "aperture",
                    "schedule"});
      DeviceEntry entry;
      auto& d = entry.device;
      d.id = r.req<std::string>(node, "id", path);
      try {
        d.kind = sim::parse_device_kind(r.req<std::string>(node, "kind", path));
      } catch (const InvalidArgument& e) {
        throw ScenarioError(path + ".kind", line_of(node["kind"]), e.what());
      }
      if (!node["position"]) throw ScenarioError(path + ".position", line_of(node), "missing required key");
      d.position = r.vec(node["position"], path + ".position");
      if (node["orientation"] && node["aim_at"]) {
        throw ScenarioError(path + ".aim_at", line_of(node["aim_at"]), "give either orientation or aim_at");
      }
      if (const auto o = node["orientation"]) d.orientation = r.vec(o, path + ".orientation");
      if (const auto a = node["aim_at"]) {
        const Vec3 dir = r.vec(a, path + ".aim_at") - d.position;
        const double len = norm(dir);
        if (len == 0.0) throw ScenarioError(path + ".aim_at", line_of(a), "aim point coincides with the device");
        d.orientation = dir * (1.0 / len);
      }
      r.opt(node, "on", path, d.on);
      if (const auto jet = node["jet"]) {
        r.expect_map(jet, path + ".jet", {"speed_m_s", "radius_m", "decay_length_m"});
        r.opt(jet, "speed_m_s", path + ".jet", d.jet.speed_m_s);
        r.opt(jet, "radius_m", path + ".jet", d.jet.radius_m);
        r.opt(jet, "decay_length_m", path + ".jet", d.jet.decay_length_m);
      }
      r.opt(node, "exchange_rate", path, d.exchange_rate);
      if (const auto ap = node["aperture"]) entry.aperture_box = r.box(ap, path + ".aperture");
      if (const auto sch = node["schedule"]) entry.schedule = r.schedule(sch, path + ".schedule");
      s.devices.push_back(std::move(entry));
    }
  }

  if (const auto p = root["probes"]) {
    r.expect_map(p, "probes", {"grid", "heights", "baseline"});
    if (const auto grid = p["grid"]) {
      if (!grid.IsSequence() || grid.size() != 2) throw ScenarioError("probes.grid", line_of(grid), "expected [rows, cols]");
      s.probes.rows = r.get<int>(grid[0], "probes.grid");
      s.probes.cols = r.get<int>(grid[1], "probes.grid");
    }
    if (const auto h = p["heights"]) {
      r.expect_map(h, "probes.heights", {"G", "T", "C"});
      r.opt(h, "G", "probes.heights", s.probes.ground_m);
      r.opt(h, "T", "probes.heights", s.probes.table_m);
      r.opt(h, "C", "probes.heights", s.probes.ceiling_m);
    }
    if (const auto b = p["baseline"]) {
      if (!b.IsSequence()) throw ScenarioError("probes.baseline", line_of(b), "expected a list of points");
      for (std::size_t n = 0; n < b.size(); ++n) {
        s.probes.baseline.push_back(r.vec(b[n], "probes.baseline[" + std::to_string(n) + "]"));
      }
    }
  }

  if (const auto w = root["wearable"]) {
    r.expect_map(w, "wearable", {"device_id", "spawn", "wrist_offset"});
    r.opt(w, "device_id", "wearable", s.wearable.device_id);
    if (const auto sp = w["spawn"]) s.wearable.spawn = r.vec(sp, "wearable.spawn", true);
    s.wearable.spawn.z = 0.0;
    if (const auto off = w["wrist_offset"]) s.wearable.wrist_offset = r.vec(off, "wearable.wrist_offset");
  }

  if (const auto ss = root["session"]) {
    r.expect_map(ss, "session",
                 {"mode", "target_ppm", "sustain_s", "merge_radius_m", "avatar_speed_m_s", "staleness_half_life_s",
                  "temp_c", "rh_pct", "survey_points"});
    auto& rules = s.session;
    r.opt(ss, "mode", "session", rules.mode);
    r.opt(ss, "target_ppm", "session", rules.target_ppm);
    r.opt(ss, "sustain_s", "session", rules.sustain_s);
    r.opt(ss, "merge_radius_m", "session", rules.merge_radius_m);
    r.opt(ss, "avatar_speed_m_s", "session", rules.avatar_speed_m_s);
    r.opt(ss, "staleness_half_life_s", "session", rules.staleness_half_life_s);
    r.opt(ss, "temp_c", "session", rules.temp_c);
    r.opt(ss, "rh_pct", "session", rules.rh_pct);
    if (const auto sp = ss["survey_points"]) {
      if (!sp.IsSequence()) throw ScenarioError("session.survey_points", line_of(sp), "expected a list of points");
      for (std::size_t n = 0; n < sp.size(); ++n) {
        auto v = r.vec(sp[n], "session.survey_points[" + std::to_string(n) + "]", true);
        v.z = 0.0;
        rules.survey_points.push_back(v);
      }
    }
  }
  return s;
}

int best_line(const std::map<std::string, int>& lines, std::string field) {
  while (!field.empty()) {
    if (auto it = lines.find(field); it != lines.end()) return it->second;
    const auto cut = field.find_last_of(".[");
    if (cut == std::string::npos) break;
    field.resize(cut);
  }
  return 0;
}

std::string num(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string vec(const Vec3& v) { return "[" + num(v.x) + ", " + num(v.y) + ", " + num(v.z) + "]"; }
std::string vec2(const Vec3& v) { return "[" + num(v.x) + ", " + num(v.y) + "]"; }
std::string box(const sim::Box& b) { return "{min: " + vec(b.min) + ", max: " + vec(b.max) + "}"; }

std::string schedule(const std::vector<sim::ActiveInterval>& windows) {
  std::string out = "[";
  for (std::size_t n = 0; n < windows.size(); ++n) {
    if (n) out += ", ";
    out += "[" + num(windows[n].on_s) + ", " + num(windows[n].off_s) + "]";
  }
  return out + "]";
}

std::string quoted(const std::string& text) {
  YAML::Emitter e;
  e << YAML::DoubleQuoted << text;
  return e.c_str();
}

}  // namespace

Scenario parse_scenario(const std::string& text, const std::string& origin) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ScenarioError(origin, e.mark.line + 1, e.msg);
  }
  Reader reader;
  Scenario s = read(root, reader);
  try {
    validate(s);
  } catch (const ScenarioError& e) {
    throw ScenarioError(e.field(), best_line(reader.lines, e.field()), e.reason());
  }
  return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioError(path.string(), 0, "cannot open scenario file");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str(), path.string());
}

std::string serialize(const Scenario& s) {
  std::ostringstream o;
  o << "name: " << quoted(s.name) << "\n";
  if (!s.notes.empty()) o << "notes: " << quoted(s.notes) << "\n";
  o << "seed: " << s.seed << "\n";
  o << "room:\n  dims_m: " << vec(s.dims) << "\n  cell_m: " << num(s.cell_m) << "\n";
  if (!s.blocked.empty()) {
    o << "  blocked:\n";
    for (const auto& b : s.blocked) o << "    - " << box(b) << "\n";
  }
  const auto& p = s.params;
  o << "params:\n"
    << "  molecular_diffusivity: " << num(p.molecular_diffusivity) << "\n"
    << "  turbulent_diffusivity: " << num(p.turbulent_diffusivity) << "\n"
    << "  settling_velocity: " << num(p.settling_velocity) << "\n"
    << "  ambient_ppm: " << num(p.ambient_ppm) << "\n"
    << "  initial_ppm: " << num(s.initial_ppm) << "\n"
    << "  warmup_s: " << num(s.warmup_s) << "\n"
    << "  dt: " << num(p.dt) << "\n"
    << "  time_scale: " << num(p.time_scale) << "\n"
    << "  emission_scale: " << num(p.emission_scale) << "\n"
    << "  allow_substeps: " << (p.allow_substeps ? "true" : "false") << "\n";
  if (!s.sources.empty()) {
    o << "sources:\n";
    for (const auto& src : s.sources) {
      o << "  - id: " << quoted(src.id) << "\n"
        << "    kind: " << sim::to_string(src.kind) << "\n"
        << "    position: " << vec(src.position) << "\n"
        << "    emission_rate: " << num(src.emission_rate) << "\n";
      if (!src.schedule.empty()) o << "    schedule: " << schedule(src.schedule) << "\n";
    }
  }
  if (!s.devices.empty()) {
    o << "devices:\n";
    for (const auto& entry : s.devices) {
      const auto& d = entry.device;
      o << "  - id: " << quoted(d.id) << "\n"
        << "    kind: " << sim::to_string(d.kind) << "\n"
        << "    position: " << vec(d.position) << "\n"
        << "    orientation: " << vec(d.orientation) << "\n"
        << "    on: " << (d.on ? "true" : "false") << "\n"
        << "    jet: {speed_m_s: " << num(d.jet.speed_m_s) << ", radius_m: " << num(d.jet.radius_m)
        << ", decay_length_m: " << num(d.jet.decay_length_m) << "}\n"
        << "    exchange_rate: " << num(d.exchange_rate) << "\n";
      if (entry.aperture_box) o << "    aperture: " << box(*entry.aperture_box) << "\n";
      if (!entry.schedule.empty()) o << "    schedule: " << schedule(entry.schedule) << "\n";
    }
  }
  const auto& pr = s.probes;
  o << "probes:\n  grid: [" << pr.rows << ", " << pr.cols << "]\n"
    << "  heights: {G: " << num(pr.ground_m) << ", T: " << num(pr.table_m) << ", C: " << num(pr.ceiling_m) << "}\n";
  if (!pr.baseline.empty()) {
    o << "  baseline:\n";
    for (const auto& b : pr.baseline) o << "    - " << vec(b) << "\n";
  }
  o << "wearable:\n  device_id: " << quoted(s.wearable.device_id) << "\n  spawn: " << vec2(s.wearable.spawn)
    << "\n  wrist_offset: " << vec(s.wearable.wrist_offset) << "\n";
  const auto& r = s.session;
  o << "session:\n"
    << "  mode: " << r.mode << "\n"
    << "  target_ppm: " << num(r.target_ppm) << "\n"
    << "  sustain_s: " << num(r.sustain_s) << "\n"
    << "  merge_radius_m: " << num(r.merge_radius_m) << "\n"
    << "  avatar_speed_m_s: " << num(r.avatar_speed_m_s) << "\n"
    << "  staleness_half_life_s: " << num(r.staleness_half_life_s) << "\n"
    << "  temp_c: " << num(r.temp_c) << "\n"
    << "  rh_pct: " << num(r.rh_pct) << "\n";
  if (!r.survey_points.empty()) {
    o << "  survey_points:\n";
    for (const auto& sp : r.survey_points) o << "    - " << vec2(sp) << "\n";
  }
  return o.str();
}

void save_scenario(const Scenario& scenario, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ScenarioError(path.string(), 0, "cannot write scenario file");
  out << serialize(scenario);
}

}  // namespace airtwin::scenario
