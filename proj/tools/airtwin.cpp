#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "airtwin/error.hpp"
#include "airtwin/scenario/calibrate.hpp"
#include "airtwin/scenario/headless.hpp"
#include "airtwin/scenario/trace.hpp"
#include "airtwin/service/device_service.hpp"

namespace {

using namespace airtwin;

struct RunArgs {
  std::string scenario;
  double minutes = 0.0;
  std::string out = "out";
  std::string policy;
  double every = 60.0;
  std::optional<std::uint64_t> seed;
};

int cmd_run(const RunArgs& a) {
  const auto sc = scenario::load_scenario(scenario::resolve(a.scenario));
  scenario::HeadlessOptions opts;
  opts.duration_s = a.minutes * 60.0;
  opts.sample_every_s = a.every;
  opts.seed = a.seed;
  if (!a.policy.empty()) opts.policy = game::parse_policy(a.policy);
  const auto result = scenario::run_headless(sc, opts);
  scenario::write_outputs(result, a.out);
  std::cout << "wrote " << result.trace.rows.size() << " rows x " << result.trace.columns.size() << " probes to "
            << (std::filesystem::path(a.out) / "probes.csv").string() << ", " << result.log.events().size()
            << " events\n";
  if (result.completed_at) std::cout << "completion at t = " << *result.completed_at << " s\n";
  if (result.fault) {
    std::cerr << "solver fault: " << *result.fault << '\n';
    return 2;
  }
  return 0;
}

struct HeatmapArgs {
  std::string trace;
  double t = 0.0;
  std::string height = "T";
  std::string out = ".";
};

int cmd_heatmap(const HeatmapArgs& a) {
  const auto layer = scenario::parse_height(a.height);
  const auto trace = scenario::read_trace_csv(a.trace);
  const auto grid = scenario::render_heatmap(trace, a.t, layer);
  std::ostringstream name;
  name << "heatmap_" << a.height << "_t" << a.t;
  const std::filesystem::path dir(a.out);
  std::filesystem::create_directories(dir);
  {
    std::ofstream csv(dir / (name.str() + ".csv"));
    scenario::write_heatmap_csv(grid, csv);
  }
  scenario::write_heatmap_ppm(grid, dir / (name.str() + ".ppm"));
  scenario::write_heatmap_csv(grid, std::cout);
  std::cerr << "wrote " << (dir / (name.str() + ".csv")).string() << " and .ppm\n";
  return 0;
}

struct ServeArgs {
  std::string scenario = "R2";
  std::string mode;
  std::string host = "127.0.0.1";
  int port = 8080;
  std::uint64_t seed = 0;
  double time_scale = 0.0;
  std::string log_dir;
  std::string www;
};

int cmd_serve(const ServeArgs& a) {
  service::ServiceConfig cfg;
  cfg.scenario = a.scenario;
  cfg.mode = a.mode;
  cfg.seed = a.seed;
  if (a.time_scale > 0.0) cfg.time_scale = a.time_scale;
  if (!a.log_dir.empty()) cfg.log_dir = a.log_dir;
  if (!a.www.empty()) cfg.www_dir = a.www;
  service::DeviceService svc(cfg);
  std::cerr << "serving " << a.scenario << " on http://" << a.host << ':' << a.port << '\n';
  svc.listen(a.host, a.port);
  return 0;
}

struct CalibrateArgs {
  std::string scenario = "pilot-office";
  double target_ppm = 1635.0;
  double target_minutes = 90.0;
  std::string height = "T";
  bool write = false;
};

int cmd_calibrate(const CalibrateArgs& a) {
  const auto path = scenario::resolve(a.scenario);
  auto sc = scenario::load_scenario(path);
  scenario::CalibrationTarget target;
  target.ppm = a.target_ppm;
  target.minutes = a.target_minutes;
  target.layer = scenario::parse_height(a.height);
  const auto r = scenario::calibrate(sc, target);
  std::printf("emission_scale %.6g -> corner max %.1f ppm at %.1f min (%d runs%s)\n", r.emission_scale,
              r.achieved_ppm, a.target_minutes, r.iterations, r.converged ? "" : ", not converged");
  if (a.write) {
    sc.params.emission_scale = r.emission_scale;
    scenario::save_scenario(sc, path);
    std::printf("updated %s\n", path.string().c_str());
  }
  return r.converged ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"airtwin: indoor CO2 twin, wearable emulator and ventilation game"};
  app.require_subcommand(1);

  RunArgs run;
  auto* run_cmd = app.add_subcommand("run", "Run a scenario headlessly and write probes.csv and events.ndjson");
  run_cmd->add_option("--scenario", run.scenario, "Scenario file or bundled name")->required();
  run_cmd->add_option("--minutes", run.minutes, "Simulated minutes")->required()->check(CLI::NonNegativeNumber);
  run_cmd->add_option("--out", run.out, "Output directory");
  run_cmd->add_option("--policy", run.policy, "Scripted player: informed or uniform");
  run_cmd->add_option("--every", run.every, "Probe sampling period in seconds")->check(CLI::PositiveNumber);
  run_cmd->add_option("--seed", run.seed, "Override the scenario seed");

  HeatmapArgs hm;
  auto* hm_cmd = app.add_subcommand("heatmap", "Render a probe-grid heatmap from a trace");
  hm_cmd->add_option("--trace", hm.trace, "probes.csv written by run")->required()->check(CLI::ExistingFile);
  hm_cmd->add_option("--t", hm.t, "Time in seconds")->required();
  hm_cmd->add_option("--height", hm.height, "G, T or C");
  hm_cmd->add_option("--out", hm.out, "Output directory");

  ServeArgs sv;
  auto* sv_cmd = app.add_subcommand("serve", "Serve the device HTTP API");
  sv_cmd->add_option("--scenario", sv.scenario, "Scenario file or bundled name")->envname("AIRTWIN_SCENARIO");
  sv_cmd->add_option("--mode", sv.mode, "ar_bubbles or heatmap_baseline")->envname("AIRTWIN_MODE");
  sv_cmd->add_option("--host", sv.host, "Bind address")->envname("AIRTWIN_HOST");
  sv_cmd->add_option("--port", sv.port, "Port")->envname("AIRTWIN_PORT");
  sv_cmd->add_option("--seed", sv.seed, "Session seed")->envname("AIRTWIN_SEED");
  sv_cmd->add_option("--time-scale", sv.time_scale, "Simulated seconds per wall second")
      ->envname("AIRTWIN_TIME_SCALE")
      ->check(CLI::NonNegativeNumber);
  sv_cmd->add_option("--log-dir", sv.log_dir, "Directory for per-session event logs")->envname("AIRTWIN_LOG_DIR");
  sv_cmd->add_option("--www", sv.www, "Static files to serve at /")->envname("AIRTWIN_WWW");

  CalibrateArgs cal;
  auto* cal_cmd = app.add_subcommand("calibrate", "Fit params.emission_scale to a corner concentration");
  cal_cmd->add_option("--scenario", cal.scenario, "Scenario file or bundled name");
  cal_cmd->add_option("--target-ppm", cal.target_ppm, "Target corner maximum")->check(CLI::PositiveNumber);
  cal_cmd->add_option("--target-minutes", cal.target_minutes, "Minute at which to match")->check(CLI::PositiveNumber);
  cal_cmd->add_option("--height", cal.height, "G, T or C");
  cal_cmd->add_flag("--write", cal.write, "Save the fitted scale back into the scenario file");

  auto* list_cmd = app.add_subcommand("list", "List bundled scenarios");

  CLI11_PARSE(app, argc, argv);
  try {
    if (*run_cmd) return cmd_run(run);
    if (*hm_cmd) return cmd_heatmap(hm);
    if (*sv_cmd) return cmd_serve(sv);
    if (*cal_cmd) return cmd_calibrate(cal);
    if (*list_cmd) {
      for (const auto& n : scenario::bundled_names()) std::cout << n << '\n';
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
