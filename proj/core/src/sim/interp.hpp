#pragma once

#include <algorithm>
#include <cmath>
#include <span>

#include "airtwin/sim/geometry.hpp"

namespace airtwin::sim::detail {

/// Trilinear interpolation at a point given in meters. Coordinates are clamped
/// to the span of voxel centers; blocked corners are skipped and the weights of
/// the open ones renormalized. Returns `fallback` when all eight are blocked.
inline double interpolate(const RoomGeometry& room, std::span<const double> c, const Vec3& p, double fallback) {
  const double h = room.cell();
  const double u = std::clamp(p.x / h - 0.5, 0.0, static_cast<double>(room.nx() - 1));
  const double v = std::clamp(p.y / h - 0.5, 0.0, static_cast<double>(room.ny() - 1));
  const double w = std::clamp(p.z / h - 0.5, 0.0, static_cast<double>(room.nz() - 1));
  const int i0 = std::min(static_cast<int>(u), room.nx() - 2);
  const int j0 = std::min(static_cast<int>(v), room.ny() - 2);
  const int k0 = std::min(static_cast<int>(w), room.nz() - 2);
  const double fx = u - i0;
  const double fy = v - j0;
  const double fz = w - k0;

  double sum = 0.0;
  double wsum = 0.0;
  for (int dk = 0; dk < 2; ++dk) {
    const double wz = dk ? fz : 1.0 - fz;
    for (int dj = 0; dj < 2; ++dj) {
      const double wy = dj ? fy : 1.0 - fy;
      for (int di = 0; di < 2; ++di) {
        const double wx = di ? fx : 1.0 - fx;
        const std::size_t idx = room.linear(i0 + di, j0 + dj, k0 + dk);
        if (room.blocked(idx)) continue;
        const double weight = wx * wy * wz;
        sum += weight * c[idx];
        wsum += weight;
      }
    }
  }
  return wsum > 0.0 ? sum / wsum : fallback;
}

}  // namespace airtwin::sim::detail
