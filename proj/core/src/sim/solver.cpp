#include "airtwin/sim/solver.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <sstream>
#include <utility>

#include "airtwin/error.hpp"

namespace airtwin::sim {
namespace {

constexpr std::array<std::pair<SourceKind, std::string_view>, 4> kSourceNames{{
    {SourceKind::occupant, "occupant"},
    {SourceKind::candle, "candle"},
    {SourceKind::heated_baking_soda, "heated_baking_soda"},
    {SourceKind::cooking, "cooking"},
}};

void inject(std::span<double> c, const RoomGeometry& room, std::span<const Source> sources, const SimParams& params,
            double t0, double h) {
  const double ppm_per_m3 = 1e6 / room.cell_volume();
  for (const auto& source : sources) {
    const double seconds = active_seconds(source, t0, t0 + h);
    if (seconds <= 0.0 || source.emission_rate <= 0.0) continue;
    const std::size_t idx = room.linear(room.voxel_of(source.position));
    if (room.blocked(idx)) continue;
    c[idx] += source.emission_rate * params.emission_scale * seconds * ppm_per_m3;
  }
}

// Donor-cell fluxes through every face of the divergence-free device flow.
// Each face moves u * h / cell of its upwind voxel, so the total is conserved
// and a uniform field stays uniform.
void advect(std::span<double> c, std::span<double> scratch, const RoomGeometry& room, const FlowField& flow,
            double h) {
  std::copy(c.begin(), c.end(), scratch.begin());
  const double a = h / room.cell();
  auto transfer = [&](std::size_t from_lo, std::size_t to_hi, double u) {
    if (u == 0.0) return;
    const double q = u > 0.0 ? a * u * scratch[from_lo] : a * u * scratch[to_hi];
    c[from_lo] -= q;
    c[to_hi] += q;
  };
  for (int k = 0; k < room.nz(); ++k) {
    for (int j = 0; j < room.ny(); ++j) {
      for (int i = 1; i < room.nx(); ++i) transfer(room.linear(i - 1, j, k), room.linear(i, j, k), flow.u(i, j, k));
    }
  }
  for (int k = 0; k < room.nz(); ++k) {
    for (int j = 1; j < room.ny(); ++j) {
      for (int i = 0; i < room.nx(); ++i) transfer(room.linear(i, j - 1, k), room.linear(i, j, k), flow.v(i, j, k));
    }
  }
  for (int k = 1; k < room.nz(); ++k) {
    for (int j = 0; j < room.ny(); ++j) {
      for (int i = 0; i < room.nx(); ++i) transfer(room.linear(i, j, k - 1), room.linear(i, j, k), flow.w(i, j, k));
    }
  }
}

// Donor-cell downward flux of the excess over ambient across horizontal faces.
void settle(std::span<double> c, std::span<double> scratch, const RoomGeometry& room, double courant,
            double ambient) {
  std::copy(c.begin(), c.end(), scratch.begin());
  for (int k = 1; k < room.nz(); ++k) {
    for (int j = 0; j < room.ny(); ++j) {
      for (int i = 0; i < room.nx(); ++i) {
        const std::size_t upper = room.linear(i, j, k);
        const std::size_t lower = room.linear(i, j, k - 1);
        if (room.blocked(upper) || room.blocked(lower)) continue;
        const double flux = courant * std::max(scratch[upper] - ambient, 0.0);
        c[upper] -= flux;
        c[lower] += flux;
      }
    }
  }
}

// Forward-Euler 7-point Laplacian; faces shared with walls or blocked voxels
// carry no flux.
void diffuse(std::span<double> c, std::span<double> scratch, const RoomGeometry& room, double k) {
  std::copy(c.begin(), c.end(), scratch.begin());
  const int nx = room.nx();
  const int ny = room.ny();
  const int nz = room.nz();
  for (int kk = 0; kk < nz; ++kk) {
    for (int j = 0; j < ny; ++j) {
      for (int i = 0; i < nx; ++i) {
        const std::size_t idx = room.linear(i, j, kk);
        if (room.blocked(idx)) continue;
        const double self = scratch[idx];
        double lap = 0.0;
        auto add = [&](int ii, int jj, int kz) {
          if (ii < 0 || jj < 0 || kz < 0 || ii >= nx || jj >= ny || kz >= nz) return;
          const std::size_t n = room.linear(ii, jj, kz);
          if (room.blocked(n)) return;
          lap += scratch[n] - self;
        };
        add(i - 1, j, kk);
        add(i + 1, j, kk);
        add(i, j - 1, kk);
        add(i, j + 1, kk);
        add(i, j, kk - 1);
        add(i, j, kk + 1);
        c[idx] = self + k * lap;
      }
    }
  }
}

void exchange(std::span<double> c, const RoomGeometry& room, std::span<const VentilationDevice> devices,
              double ambient, double h) {
  for (const auto& device : devices) {
    if (!device.on || device.exchange_rate <= 0.0) continue;
    const double a = device.exchange_rate * h;
    for (const auto& v : aperture_voxels(device, room)) {
      const std::size_t idx = room.linear(v);
      if (room.blocked(idx)) continue;
      c[idx] += a * (ambient - c[idx]);
    }
  }
}

}  // namespace

std::string_view to_string(SourceKind kind) {
  for (const auto& [k, name] : kSourceNames) {
    if (k == kind) return name;
  }
  return "unknown";
}

SourceKind parse_source_kind(std::string_view name) {
  for (const auto& [k, n] : kSourceNames) {
    if (n == name) return k;
  }
  throw InvalidArgument("unknown source kind '" + std::string(name) + "'");
}

double default_emission_rate(SourceKind kind) {
  switch (kind) {
    case SourceKind::occupant:
      return 5e-6;
    case SourceKind::candle:
      return 1e-6;
    case SourceKind::heated_baking_soda:
      return 2e-6;
    case SourceKind::cooking:
      return 8e-6;
  }
  return 0.0;
}

double active_seconds(const Source& source, double t0, double t1) {
  if (t1 <= t0) return 0.0;
  if (source.schedule.empty()) return t1 - t0;
  double total = 0.0;
  for (const auto& w : source.schedule) {
    const double lo = std::max(t0, w.on_s);
    const double hi = std::min(t1, w.off_s);
    if (hi > lo) total += hi - lo;
  }
  return total;
}

void validate(const SimParams& p) {
  if (!(p.molecular_diffusivity >= 0.0) || !(p.turbulent_diffusivity >= 0.0) || !(p.diffusivity() > 0.0)) {
    throw InvalidArgument("diffusivity must be positive");
  }
  if (!(p.settling_velocity >= 0.0)) throw InvalidArgument("settling_velocity must be >= 0");
  if (!(p.ambient_ppm >= 0.0)) throw InvalidArgument("ambient_ppm must be >= 0");
  if (!(p.dt > 0.0)) throw InvalidArgument("dt must be positive");
  if (!(p.time_scale > 0.0)) throw InvalidArgument("time_scale must be positive");
  if (!(p.emission_scale >= 0.0)) throw InvalidArgument("emission_scale must be >= 0");
}

double stable_dt(const RoomGeometry& room, const FlowField& flow, std::span<const VentilationDevice> devices,
                 const SimParams& params) {
  const double h = room.cell();
  double bound = h * h / (6.0 * params.diffusivity());
  const double speed = flow.max_outflow() + params.settling_velocity;
  if (speed > 0.0) bound = std::min(bound, h / speed);
  for (const auto& device : devices) {
    if (device.on && device.exchange_rate > 0.0) bound = std::min(bound, 1.0 / device.exchange_rate);
  }
  return bound;
}

int substep_count(double dt, double bound) {
  if (dt <= bound) return 1;
  // Relative slack so that dt == n * bound does not round up to n + 1.
  return static_cast<int>(std::ceil(dt / bound * (1.0 - 1e-12)));
}

void step_in_place(ConcentrationField& field, std::span<const Source> sources,
                   std::span<const VentilationDevice> devices, const FlowField& flow, const SimParams& params,
                   double dt) {
  if (dt < 0.0 || !std::isfinite(dt)) throw InvalidArgument("dt must be finite and non-negative");
  if (dt == 0.0) return;
  const auto& room = field.geometry();
  const int n = substep_count(dt, stable_dt(room, flow, devices, params));
  if (n > 1 && !params.allow_substeps) {
    std::ostringstream msg;
    msg << "dt " << dt << " s exceeds the stability bound " << stable_dt(room, flow, devices, params)
        << " s and substepping is disabled";
    throw StabilityError(msg.str());
  }
  const double h = dt / n;
  const double k = params.diffusivity() * h / (room.cell() * room.cell());
  const double courant = params.settling_velocity * h / room.cell();

  std::vector<double> c(field.values().begin(), field.values().end());
  std::vector<double> scratch(c.size());
  double t = field.t;
  double clamped = 0.0;
  for (int s = 0; s < n; ++s) {
    inject(c, room, sources, params, t, h);
    if (!flow.empty()) advect(c, scratch, room, flow, h);
    if (courant > 0.0) settle(c, scratch, room, courant, params.ambient_ppm);
    diffuse(c, scratch, room, k);
    exchange(c, room, devices, params.ambient_ppm, h);
    for (std::size_t idx = 0; idx < c.size(); ++idx) {
      if (!std::isfinite(c[idx])) {
        const auto v = room.unlinear(idx);
        std::ostringstream msg;
        msg << "non-finite concentration at voxel (" << v.i << ", " << v.j << ", " << v.k << ") at t=" << t;
        throw SolverFault(msg.str());
      }
      if (c[idx] < 0.0) {
        clamped -= c[idx];
        c[idx] = 0.0;
      }
    }
    // Sub-step times accumulate from the start to keep t exact for n == 1.
    t = field.t + dt * (s + 1) / n;
  }
  std::copy(c.begin(), c.end(), field.values().begin());
  field.t = t;
  field.clamped_volume_m3 += clamped * 1e-6 * room.cell_volume();
}

ConcentrationField step(const ConcentrationField& field, std::span<const Source> sources,
                        std::span<const VentilationDevice> devices, const SimParams& params, double dt) {
  ConcentrationField next = field;
  const FlowField flow(field.geometry(), devices);
  step_in_place(next, sources, devices, flow, params, dt);
  return next;
}

}  // namespace airtwin::sim
