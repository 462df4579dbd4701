#include "airtwin/sim/field.hpp"

#include <sstream>

#include "airtwin/error.hpp"
#include "interp.hpp"

namespace airtwin::sim {

ConcentrationField::ConcentrationField(std::shared_ptr<const RoomGeometry> geometry, double fill_ppm)
    : geometry_(std::move(geometry)) {
  if (!geometry_) throw InvalidArgument("field requires a geometry");
  c_.assign(geometry_->size(), 0.0);
  for (std::size_t idx = 0; idx < c_.size(); ++idx) {
    if (!geometry_->blocked(idx)) c_[idx] = fill_ppm;
  }
}

ConcentrationField init_field(std::shared_ptr<const RoomGeometry> geometry, double ambient_ppm) {
  if (!(ambient_ppm >= 0.0) || !std::isfinite(ambient_ppm)) {
    throw InvalidArgument("ambient concentration must be finite and non-negative");
  }
  return ConcentrationField(std::move(geometry), ambient_ppm);
}

ConcentrationField init_field(const RoomGeometry& geometry, double ambient_ppm) {
  return init_field(std::make_shared<const RoomGeometry>(geometry), ambient_ppm);
}

double sample(const ConcentrationField& field, const Vec3& p) {
  const auto& room = field.geometry();
  if (!room.contains(p)) {
    std::ostringstream msg;
    msg << "point (" << p.x << ", " << p.y << ", " << p.z << ") is outside the room";
    throw OutOfRoom(msg.str());
  }
  const VoxelIndex home = room.voxel_of(p);
  if (room.blocked(home)) {
    std::ostringstream msg;
    msg << "point (" << p.x << ", " << p.y << ", " << p.z << ") is inside a blocked voxel";
    throw OutOfRoom(msg.str());
  }
  return detail::interpolate(room, field.values(), p, field.at(home));
}

double total_co2_volume(const ConcentrationField& field) {
  const auto& room = field.geometry();
  const auto c = field.values();
  double sum = 0.0;
  for (std::size_t idx = 0; idx < c.size(); ++idx) {
    if (!room.blocked(idx)) sum += c[idx];
  }
  return sum * 1e-6 * room.cell_volume();
}

double mean_ppm(const ConcentrationField& field) {
  const auto& room = field.geometry();
  return total_co2_volume(field) / (1e-6 * room.cell_volume() * static_cast<double>(room.open_count()));
}

}  // namespace airtwin::sim
