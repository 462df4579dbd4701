#pragma once

#include <memory>
#include <span>
#include <vector>

#include "airtwin/sim/geometry.hpp"

namespace airtwin::sim {

/// CO2 concentration (ppm) per voxel plus the simulated clock.
/// Blocked voxels hold zero and never change.
class ConcentrationField {
 public:
  ConcentrationField(std::shared_ptr<const RoomGeometry> geometry, double fill_ppm);

  const RoomGeometry& geometry() const { return *geometry_; }
  const std::shared_ptr<const RoomGeometry>& geometry_ptr() const { return geometry_; }

  std::span<const double> values() const { return c_; }
  std::span<double> values() { return c_; }
  double at(VoxelIndex v) const { return c_[geometry_->linear(v)]; }
  double& at(VoxelIndex v) { return c_[geometry_->linear(v)]; }

  /// Simulated seconds since scenario start.
  double t = 0.0;
  /// CO2 volume (m^3) added by clamping negative voxels back to zero.
  double clamped_volume_m3 = 0.0;

 private:
  std::shared_ptr<const RoomGeometry> geometry_;
  std::vector<double> c_;
};

ConcentrationField init_field(std::shared_ptr<const RoomGeometry> geometry, double ambient_ppm);
ConcentrationField init_field(const RoomGeometry& geometry, double ambient_ppm);

/// Trilinear interpolation between the eight voxel centers around p.
/// Blocked corners are dropped and the remaining weights renormalized.
/// Throws OutOfRoom outside the room or inside a blocked voxel.
double sample(const ConcentrationField& field, const Vec3& p);

/// Sum over open voxels of c * 1e-6 * cell volume, in m^3 of CO2.
double total_co2_volume(const ConcentrationField& field);

/// Volume-weighted mean concentration over open voxels.
double mean_ppm(const ConcentrationField& field);

}  // namespace airtwin::sim
