#include "airtwin/sim/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "airtwin/error.hpp"

namespace airtwin::sim {
namespace {

int cell_count(double dim, double cell) {
  // Tolerate dims that are an exact multiple of the cell up to rounding.
  return static_cast<int>(std::ceil(dim / cell - 1e-9));
}

}  // namespace

RoomGeometry::RoomGeometry(Vec3 dims_m, double cell_m, std::span<const VoxelIndex> blocked)
    : dims_(dims_m), cell_(cell_m) {
  if (!(dims_m.x > 0.0) || !(dims_m.y > 0.0) || !(dims_m.z > 0.0)) {
    throw InvalidArgument("room dimensions must be positive");
  }
  if (!(cell_m > 0.0)) {
    throw InvalidArgument("cell size must be positive");
  }
  nx_ = cell_count(dims_m.x, cell_m);
  ny_ = cell_count(dims_m.y, cell_m);
  nz_ = cell_count(dims_m.z, cell_m);
  if (nx_ < 2 || ny_ < 2 || nz_ < 2) {
    throw InvalidArgument("room must span at least two cells per axis");
  }
  mask_.assign(static_cast<std::size_t>(nx_) * ny_ * nz_, 0);
  for (const auto& v : blocked) {
    if (!in_grid(v)) {
      throw InvalidArgument("blocked voxel (" + std::to_string(v.i) + "," + std::to_string(v.j) + "," +
                            std::to_string(v.k) + ") outside grid");
    }
    mask_[linear(v)] = 1;
  }
  open_count_ = static_cast<std::size_t>(std::count(mask_.begin(), mask_.end(), std::uint8_t{0}));
  if (open_count_ == 0) {
    throw InvalidArgument("every voxel is blocked");
  }
}

VoxelIndex RoomGeometry::unlinear(std::size_t idx) const {
  const auto plane = static_cast<std::size_t>(nx_) * ny_;
  const int k = static_cast<int>(idx / plane);
  const auto rem = idx % plane;
  return {static_cast<int>(rem % nx_), static_cast<int>(rem / nx_), k};
}

std::vector<VoxelIndex> RoomGeometry::blocked_voxels() const {
  std::vector<VoxelIndex> out;
  for (std::size_t idx = 0; idx < mask_.size(); ++idx) {
    if (mask_[idx]) out.push_back(unlinear(idx));
  }
  return out;
}

bool RoomGeometry::contains(const Vec3& p) const {
  return p.x >= 0.0 && p.y >= 0.0 && p.z >= 0.0 && p.x <= dims_.x && p.y <= dims_.y && p.z <= dims_.z;
}

VoxelIndex RoomGeometry::voxel_of(const Vec3& p) const {
  auto axis = [this](double x, int n) {
    return std::clamp(static_cast<int>(std::floor(x / cell_)), 0, n - 1);
  };
  return {axis(p.x, nx_), axis(p.y, ny_), axis(p.z, nz_)};
}

Vec3 RoomGeometry::center(VoxelIndex v) const {
  return {(v.i + 0.5) * cell_, (v.j + 0.5) * cell_, (v.k + 0.5) * cell_};
}

std::vector<VoxelIndex> RoomGeometry::voxels_in(const Box& box) const {
  std::vector<VoxelIndex> out;
  for (int k = 0; k < nz_; ++k) {
    for (int j = 0; j < ny_; ++j) {
      for (int i = 0; i < nx_; ++i) {
        const Vec3 c = center({i, j, k});
        if (c.x >= box.min.x && c.x <= box.max.x && c.y >= box.min.y && c.y <= box.max.y && c.z >= box.min.z &&
            c.z <= box.max.z) {
          out.push_back({i, j, k});
        }
      }
    }
  }
  return out;
}

}  // namespace airtwin::sim
