#pragma once

// Straightforward transcription of the transport step on a nested grid, used
// as an oracle for the production solver.

#include <algorithm>
#include <cmath>
#include <vector>

#include "airtwin/sim/flow.hpp"
#include "airtwin/sim/solver.hpp"

namespace reftest {

struct RefGrid {
  int nx = 0, ny = 0, nz = 0;
  double h = 0.5;
  std::vector<std::vector<std::vector<char>>> solid;   // [k][j][i]
  std::vector<std::vector<std::vector<double>>> c;     // [k][j][i]
  double t = 0.0;

  bool open(int i, int j, int k) const {
    return i >= 0 && j >= 0 && k >= 0 && i < nx && j < ny && k < nz && !solid[k][j][i];
  }
};

inline RefGrid from_field(const airtwin::sim::ConcentrationField& f) {
  const auto& room = f.geometry();
  RefGrid g;
  g.nx = room.nx();
  g.ny = room.ny();
  g.nz = room.nz();
  g.h = room.cell();
  g.t = f.t;
  g.solid.assign(g.nz, std::vector<std::vector<char>>(g.ny, std::vector<char>(g.nx, 0)));
  g.c.assign(g.nz, std::vector<std::vector<double>>(g.ny, std::vector<double>(g.nx, 0.0)));
  for (int k = 0; k < g.nz; ++k)
    for (int j = 0; j < g.ny; ++j)
      for (int i = 0; i < g.nx; ++i) {
        g.solid[k][j][i] = room.blocked(airtwin::sim::VoxelIndex{i, j, k}) ? 1 : 0;
        g.c[k][j][i] = f.at(airtwin::sim::VoxelIndex{i, j, k});
      }
  return g;
}

inline double source_seconds(const airtwin::sim::Source& s, double a, double b) {
  if (b <= a) return 0.0;
  if (s.schedule.empty()) return b - a;
  double sum = 0.0;
  for (const auto& w : s.schedule) {
    const double lo = std::max(a, w.on_s), hi = std::min(b, w.off_s);
    if (hi > lo) sum += hi - lo;
  }
  return sum;
}

/// One call of step() with the device flow given: substep count, then per
/// substep inject, face-flux transport, settle, diffuse, exchange, clamp.
inline void ref_step(RefGrid& g, const std::vector<airtwin::sim::Source>& sources,
                     const std::vector<airtwin::sim::VentilationDevice>& devices, const airtwin::sim::FlowField& flow,
                     const airtwin::sim::SimParams& p, double dt) {
  using Cube = std::vector<std::vector<std::vector<double>>>;
  const double h = g.h;
  const double D = p.diffusivity();

  // Largest outflow of any voxel, recomputed from the faces.
  double vmax = 0.0;
  if (!flow.empty()) {
    for (int k = 0; k < g.nz; ++k)
      for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
          if (g.solid[k][j][i]) continue;
          const double out = std::max(flow.u(i + 1, j, k), 0.0) + std::max(-flow.u(i, j, k), 0.0) +
                             std::max(flow.v(i, j + 1, k), 0.0) + std::max(-flow.v(i, j, k), 0.0) +
                             std::max(flow.w(i, j, k + 1), 0.0) + std::max(-flow.w(i, j, k), 0.0);
          vmax = std::max(vmax, out);
        }
  }

  double bound = h * h / (6.0 * D);
  if (vmax + p.settling_velocity > 0.0) bound = std::min(bound, h / (vmax + p.settling_velocity));
  for (const auto& d : devices)
    if (d.on && d.exchange_rate > 0.0) bound = std::min(bound, 1.0 / d.exchange_rate);
  int n = 1;
  if (dt > bound) n = int(std::ceil(dt / bound * (1.0 - 1e-12)));
  if (n > 1 && !p.allow_substeps) throw airtwin::StabilityError("substeps disabled");

  const double hs = dt / n;
  const double kd = D * hs / (h * h);
  const double cr = p.settling_velocity * hs / h;
  const double t0 = g.t;
  for (int s = 0; s < n; ++s) {
    // inject
    for (const auto& src : sources) {
      const double sec = source_seconds(src, g.t, g.t + hs);
      if (sec <= 0.0 || src.emission_rate <= 0.0) continue;
      auto cellof = [&](double x, int m) { return std::clamp(int(std::floor(x / h)), 0, m - 1); };
      const int i = cellof(src.position.x, g.nx), j = cellof(src.position.y, g.ny), k = cellof(src.position.z, g.nz);
      if (g.solid[k][j][i]) continue;
      g.c[k][j][i] += src.emission_rate * p.emission_scale * sec * (1e6 / (h * h * h));
    }
    // transport: x faces, then y, then z
    if (!flow.empty()) {
      const Cube old = g.c;
      const double a = hs / h;
      auto move = [&](double u, int i0, int j0, int k0, int i1, int j1, int k1) {
        if (u == 0.0) return;
        const double q = u > 0.0 ? a * u * old[k0][j0][i0] : a * u * old[k1][j1][i1];
        g.c[k0][j0][i0] -= q;
        g.c[k1][j1][i1] += q;
      };
      for (int k = 0; k < g.nz; ++k)
        for (int j = 0; j < g.ny; ++j)
          for (int i = 1; i < g.nx; ++i) move(flow.u(i, j, k), i - 1, j, k, i, j, k);
      for (int k = 0; k < g.nz; ++k)
        for (int j = 1; j < g.ny; ++j)
          for (int i = 0; i < g.nx; ++i) move(flow.v(i, j, k), i, j - 1, k, i, j, k);
      for (int k = 1; k < g.nz; ++k)
        for (int j = 0; j < g.ny; ++j)
          for (int i = 0; i < g.nx; ++i) move(flow.w(i, j, k), i, j, k - 1, i, j, k);
    }
    // settle
    if (cr > 0.0) {
      const Cube old = g.c;
      for (int k = 1; k < g.nz; ++k)
        for (int j = 0; j < g.ny; ++j)
          for (int i = 0; i < g.nx; ++i) {
            if (g.solid[k][j][i] || g.solid[k - 1][j][i]) continue;
            const double q = cr * std::max(old[k][j][i] - p.ambient_ppm, 0.0);
            g.c[k][j][i] -= q;
            g.c[k - 1][j][i] += q;
          }
    }
    // diffuse
    {
      const Cube old = g.c;
      for (int k = 0; k < g.nz; ++k)
        for (int j = 0; j < g.ny; ++j)
          for (int i = 0; i < g.nx; ++i) {
            if (g.solid[k][j][i]) continue;
            const double self = old[k][j][i];
            double lap = 0.0;
            const int nb[6][3] = {{i - 1, j, k}, {i + 1, j, k}, {i, j - 1, k},
                                  {i, j + 1, k}, {i, j, k - 1}, {i, j, k + 1}};
            for (const auto& q : nb)
              if (g.open(q[0], q[1], q[2])) lap += old[q[2]][q[1]][q[0]] - self;
            g.c[k][j][i] = self + kd * lap;
          }
    }
    // exchange
    for (const auto& d : devices) {
      if (!d.on || d.exchange_rate <= 0.0) continue;
      const double a = d.exchange_rate * hs;
      std::vector<airtwin::sim::VoxelIndex> ap = d.aperture;
      if (ap.empty()) {
        auto cellof = [&](double x, int m) { return std::clamp(int(std::floor(x / h)), 0, m - 1); };
        ap.push_back({cellof(d.position.x, g.nx), cellof(d.position.y, g.ny), cellof(d.position.z, g.nz)});
      }
      for (const auto& v : ap) {
        if (g.solid[v.k][v.j][v.i]) continue;
        double& x = g.c[v.k][v.j][v.i];
        x += a * (p.ambient_ppm - x);
      }
    }
    for (auto& plane : g.c)
      for (auto& row : plane)
        for (auto& x : row) {
          if (!std::isfinite(x)) throw airtwin::SolverFault("non-finite");
          if (x < 0.0) x = 0.0;
        }
    g.t = t0 + dt * (s + 1) / n;
  }
}

}  // namespace reftest
