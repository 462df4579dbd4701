#include "airtwin/scenario/calibrate.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

#include "airtwin/error.hpp"
#include "airtwin/sim/solver.hpp"

namespace airtwin::scenario {

double corner_max(const sim::ConcentrationField& field, const ProbeLayout& probes, HeightLayer layer) {
  const auto& dims = field.geometry().dims();
  double best = 0.0;
  for (int r : {0, probes.rows - 1}) {
    for (int c : {0, probes.cols - 1}) best = std::max(best, sim::sample(field, probes.position(dims, r, c, layer)));
  }
  return best;
}

std::vector<double> corner_series(const Scenario& s, const std::vector<double>& minutes, HeightLayer layer) {
  validate(s);
  const auto room = std::make_shared<const sim::RoomGeometry>(s.geometry());
  auto field = sim::init_field(room, s.initial_ppm);
  field.t = -s.warmup_s;
  auto devices = s.build_devices(*room);
  sim::FlowField flow(*room, devices);
  const double dt = s.params.dt;

  std::vector<double> out;
  for (double m : minutes) {
    const double until = m * 60.0;
    while (field.t < until - 1e-9) {
      bool changed = false;
      for (std::size_t n = 0; n < devices.size(); ++n) {
        const auto& schedule = s.devices[n].schedule;
        if (schedule.empty()) continue;
        const double t = field.t;
        const bool on = std::any_of(schedule.begin(), schedule.end(),
                                    [t](const auto& iv) { return iv.on_s <= t && t < iv.off_s; });
        changed = changed || on != devices[n].on;
        devices[n].on = on;
      }
      if (changed) flow = sim::FlowField(*room, devices);
      sim::step_in_place(field, s.sources, devices, flow, s.params, dt);
    }
    out.push_back(corner_max(field, s.probes, layer));
  }
  return out;
}

CalibrationResult calibrate(const Scenario& scenario, const CalibrationTarget& target) {
  auto at_scale = [&](double scale) {
    Scenario s = scenario;
    s.params.emission_scale = scale;
    return corner_series(s, {target.minutes}, target.layer).front() - target.ppm;
  };
  CalibrationResult result;
  double x0 = 0.0;
  double f0 = at_scale(x0);
  if (f0 > 0.0) throw InvalidArgument("target ppm is below the source-free corner concentration");
  double x1 = std::max(scenario.params.emission_scale, 1e-3);
  double f1 = at_scale(x1);
  result.iterations = 2;
  // Expand until the target is bracketed.
  while (f1 < 0.0 && result.iterations < target.max_iterations) {
    x0 = x1;
    f0 = f1;
    x1 *= 2.0;
    f1 = at_scale(x1);
    ++result.iterations;
  }
  double lo = x0;
  double hi = x1;
  double flo = f0;
  double fhi = f1;
  double x = x1;
  double fx = f1;
  while (std::abs(fx) > target.tolerance_ppm && result.iterations < target.max_iterations) {
    x = fhi != flo ? lo - flo * (hi - lo) / (fhi - flo) : 0.5 * (lo + hi);
    if (!(x > lo && x < hi)) x = 0.5 * (lo + hi);
    fx = at_scale(x);
    ++result.iterations;
    if (fx < 0.0) {
      lo = x;
      flo = fx;
    } else {
      hi = x;
      fhi = fx;
    }
  }
  result.emission_scale = x;
  result.achieved_ppm = fx + target.ppm;
  result.converged = std::abs(fx) <= target.tolerance_ppm;
  return result;
}

}  // namespace airtwin::scenario
