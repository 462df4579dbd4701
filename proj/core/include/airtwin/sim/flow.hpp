#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "airtwin/sim/geometry.hpp"

namespace airtwin::sim {

enum class DeviceKind { window_ventilator, open_window, ceiling_fan, pedestal_fan, hand_fan, split_ac };

std::string_view to_string(DeviceKind kind);
DeviceKind parse_device_kind(std::string_view name);

/// Kinds with an aimable jet.
bool is_directed(DeviceKind kind);
/// Kinds that exchange room air with outdoor air.
bool is_exchange(DeviceKind kind);

struct JetParams {
  double speed_m_s = 0.0;
  double radius_m = 0.3;
  double decay_length_m = 4.0;
  bool operator==(const JetParams&) const = default;
};

struct VentilationDevice {
  std::string id;
  DeviceKind kind = DeviceKind::pedestal_fan;
  Vec3 position;
  Vec3 orientation{1.0, 0.0, 0.0};
  bool on = false;
  JetParams jet;
  /// Relaxation rate toward ambient (1/s) applied on the aperture voxels.
  double exchange_rate = 0.0;
  /// Empty means the voxel holding `position`.
  std::vector<VoxelIndex> aperture;

  bool operator==(const VentilationDevice&) const = default;
};

/// Throws InvalidArgument when the device breaks its kind's invariants or
/// OutOfRoom when it is placed outside the room.
void validate(const VentilationDevice& device, const RoomGeometry& room);

std::vector<VoxelIndex> aperture_voxels(const VentilationDevice& device, const RoomGeometry& room);

/// Axial jet of one device, ignoring its on/off state:
///   v(s, r) = speed * exp(-s / decay) * exp(-r^2 / (2 radius^2)) along the
/// orientation for axial distance s >= 0, zero behind the fan plane.
Vec3 jet_velocity(const VentilationDevice& device, const Vec3& p);

/// Superposition of the jets of every device that is on.
/// Throws OutOfRoom when p is outside the room.
Vec3 velocity_at(std::span<const VentilationDevice> devices, const RoomGeometry& room, const Vec3& p);

/// Device flow on the staggered grid. The superposed jets are sampled at the
/// center of every face between two open voxels, then projected onto a
/// discretely divergence-free field: walls and obstacles carry no flux, and
/// what a jet pushes forward returns through the rest of the room.
class FlowField {
 public:
  FlowField() = default;
  FlowField(const RoomGeometry& room, std::span<const VentilationDevice> devices);

  bool empty() const { return !any_; }
  int nx() const { return nx_; }
  int ny() const { return ny_; }
  int nz() const { return nz_; }

  /// +x velocity on the face between voxels (i-1, j, k) and (i, j, k); i in [0, nx].
  double u(int i, int j, int k) const { return ux_.empty() ? 0.0 : ux_[x_face(i, j, k)]; }
  /// +y velocity on the face between (i, j-1, k) and (i, j, k); j in [0, ny].
  double v(int i, int j, int k) const { return uy_.empty() ? 0.0 : uy_[y_face(i, j, k)]; }
  /// +z velocity on the face between (i, j, k-1) and (i, j, k); k in [0, nz].
  double w(int i, int j, int k) const { return uz_.empty() ? 0.0 : uz_[z_face(i, j, k)]; }

  /// Voxel-center velocity, the mean of the two faces on each axis.
  Vec3 at(std::size_t idx) const { return center_.empty() ? Vec3{} : center_[idx]; }
  std::span<const Vec3> values() const { return center_; }
  double max_speed() const { return max_speed_; }
  /// Largest total outward face velocity of any voxel; bounds the transport step.
  double max_outflow() const { return max_outflow_; }
  /// Largest |net outflow| left by the projection, m/s.
  double max_divergence() const { return max_divergence_; }

 private:
  std::size_t x_face(int i, int j, int k) const { return (static_cast<std::size_t>(k) * ny_ + j) * (nx_ + 1) + i; }
  std::size_t y_face(int i, int j, int k) const { return (static_cast<std::size_t>(k) * (ny_ + 1) + j) * nx_ + i; }
  std::size_t z_face(int i, int j, int k) const { return (static_cast<std::size_t>(k) * ny_ + j) * nx_ + i; }

  int nx_ = 0;
  int ny_ = 0;
  int nz_ = 0;
  std::vector<double> ux_;
  std::vector<double> uy_;
  std::vector<double> uz_;
  std::vector<Vec3> center_;
  double max_speed_ = 0.0;
  double max_outflow_ = 0.0;
  double max_divergence_ = 0.0;
  bool any_ = false;
};

}  // namespace airtwin::sim
