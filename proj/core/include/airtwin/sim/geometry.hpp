#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "airtwin/vec3.hpp"

namespace airtwin::sim {

struct VoxelIndex {
  int i = 0;
  int j = 0;
  int k = 0;
  auto operator<=>(const VoxelIndex&) const = default;
};

/// Axis-aligned box in room coordinates (meters).
struct Box {
  Vec3 min;
  Vec3 max;
  bool operator==(const Box&) const = default;
};

/// Voxelized room. Cell counts are ceil(dim / cell) per axis; voxel (i,j,k)
/// has its center at ((i+0.5)h, (j+0.5)h, (k+0.5)h). Blocked voxels model
/// furniture and partitions: no flux, no velocity, no stored CO2.
class RoomGeometry {
 public:
  /// Throws InvalidArgument on non-positive dimensions, fewer than two cells
  /// on any axis, or blocked indices outside the grid.
  RoomGeometry(Vec3 dims_m, double cell_m, std::span<const VoxelIndex> blocked = {});

  const Vec3& dims() const { return dims_; }
  double cell() const { return cell_; }
  double cell_volume() const { return cell_ * cell_ * cell_; }
  int nx() const { return nx_; }
  int ny() const { return ny_; }
  int nz() const { return nz_; }
  std::size_t size() const { return mask_.size(); }
  std::size_t open_count() const { return open_count_; }

  std::size_t linear(int i, int j, int k) const {
    return (static_cast<std::size_t>(k) * ny_ + j) * nx_ + i;
  }
  std::size_t linear(VoxelIndex v) const { return linear(v.i, v.j, v.k); }
  VoxelIndex unlinear(std::size_t idx) const;

  bool in_grid(VoxelIndex v) const {
    return v.i >= 0 && v.j >= 0 && v.k >= 0 && v.i < nx_ && v.j < ny_ && v.k < nz_;
  }
  bool blocked(std::size_t idx) const { return mask_[idx] != 0; }
  bool blocked(VoxelIndex v) const { return blocked(linear(v)); }
  std::vector<VoxelIndex> blocked_voxels() const;

  /// Inclusive containment in [0, dims] on every axis.
  bool contains(const Vec3& p) const;
  /// Voxel holding p; points on the far faces map to the last cell.
  VoxelIndex voxel_of(const Vec3& p) const;
  Vec3 center(VoxelIndex v) const;
  /// Voxels whose centers fall inside the box (inclusive).
  std::vector<VoxelIndex> voxels_in(const Box& box) const;

  bool operator==(const RoomGeometry& o) const {
    return dims_ == o.dims_ && cell_ == o.cell_ && mask_ == o.mask_;
  }

 private:
  Vec3 dims_;
  double cell_;
  int nx_ = 0;
  int ny_ = 0;
  int nz_ = 0;
  std::vector<std::uint8_t> mask_;
  std::size_t open_count_ = 0;
};

}  // namespace airtwin::sim
