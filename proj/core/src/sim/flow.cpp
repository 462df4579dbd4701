#include "airtwin/sim/flow.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>
#include <utility>

#include "airtwin/error.hpp"

namespace airtwin::sim {
namespace {

constexpr std::array<std::pair<DeviceKind, std::string_view>, 6> kDeviceNames{{
    {DeviceKind::window_ventilator, "window_ventilator"},
    {DeviceKind::open_window, "open_window"},
    {DeviceKind::ceiling_fan, "ceiling_fan"},
    {DeviceKind::pedestal_fan, "pedestal_fan"},
    {DeviceKind::hand_fan, "hand_fan"},
    {DeviceKind::split_ac, "split_ac"},
}};

}  // namespace

std::string_view to_string(DeviceKind kind) {
  for (const auto& [k, name] : kDeviceNames) {
    if (k == kind) return name;
  }
  return "unknown";
}

DeviceKind parse_device_kind(std::string_view name) {
  for (const auto& [k, n] : kDeviceNames) {
    if (n == name) return k;
  }
  throw InvalidArgument("unknown device kind '" + std::string(name) + "'");
}

bool is_directed(DeviceKind kind) {
  return kind == DeviceKind::ceiling_fan || kind == DeviceKind::pedestal_fan || kind == DeviceKind::hand_fan ||
         kind == DeviceKind::split_ac;
}

bool is_exchange(DeviceKind kind) {
  return kind == DeviceKind::window_ventilator || kind == DeviceKind::open_window;
}

void validate(const VentilationDevice& device, const RoomGeometry& room) {
  const std::string who = "device '" + device.id + "': ";
  if (!room.contains(device.position)) throw OutOfRoom(who + "position outside the room");
  if ((is_directed(device.kind) || device.jet.speed_m_s > 0.0) && std::abs(norm(device.orientation) - 1.0) > 1e-9) {
    throw InvalidArgument(who + "orientation must be a unit vector");
  }
  if (!(device.exchange_rate >= 0.0)) throw InvalidArgument(who + "exchange_rate must be >= 0");
  if (device.kind == DeviceKind::split_ac && device.exchange_rate != 0.0) {
    throw InvalidArgument(who + "split_ac recirculates indoor air; exchange_rate must be 0");
  }
  if (!is_exchange(device.kind) && device.kind != DeviceKind::split_ac && device.exchange_rate != 0.0) {
    throw InvalidArgument(who + "fans do not exchange air; exchange_rate must be 0");
  }
  if (!(device.jet.speed_m_s >= 0.0)) throw InvalidArgument(who + "jet speed must be >= 0");
  if (device.jet.speed_m_s > 0.0 && (!(device.jet.radius_m > 0.0) || !(device.jet.decay_length_m > 0.0))) {
    throw InvalidArgument(who + "jet radius and decay length must be positive");
  }
  for (const auto& v : device.aperture) {
    if (!room.in_grid(v)) throw OutOfRoom(who + "aperture voxel outside the grid");
  }
}

std::vector<VoxelIndex> aperture_voxels(const VentilationDevice& device, const RoomGeometry& room) {
  if (!device.aperture.empty()) return device.aperture;
  return {room.voxel_of(device.position)};
}

Vec3 jet_velocity(const VentilationDevice& device, const Vec3& p) {
  const auto& jet = device.jet;
  if (jet.speed_m_s <= 0.0) return {};
  const Vec3 d = p - device.position;
  const double s = dot(d, device.orientation);
  if (s < 0.0) return {};
  const double r2 = std::max(0.0, dot(d, d) - s * s);
  const double magnitude = jet.speed_m_s * std::exp(-s / jet.decay_length_m) *
                           std::exp(-r2 / (2.0 * jet.radius_m * jet.radius_m));
  return device.orientation * magnitude;
}

Vec3 velocity_at(std::span<const VentilationDevice> devices, const RoomGeometry& room, const Vec3& p) {
  if (!room.contains(p)) {
    std::ostringstream msg;
    msg << "point (" << p.x << ", " << p.y << ", " << p.z << ") is outside the room";
    throw OutOfRoom(msg.str());
  }
  Vec3 v;
  for (const auto& device : devices) {
    if (device.on) v += jet_velocity(device, p);
  }
  return v;
}

namespace {

// Graph Laplacian over open voxels joined by open faces: (A p)_n = sum (p_n - p_m).
void apply_laplacian(const RoomGeometry& room, std::span<const double> p, std::span<double> out) {
  const int nx = room.nx();
  const int ny = room.ny();
  const int nz = room.nz();
  for (int k = 0; k < nz; ++k) {
    for (int j = 0; j < ny; ++j) {
      for (int i = 0; i < nx; ++i) {
        const std::size_t idx = room.linear(i, j, k);
        if (room.blocked(idx)) {
          out[idx] = 0.0;
          continue;
        }
        double sum = 0.0;
        auto add = [&](int ii, int jj, int kk) {
          if (ii < 0 || jj < 0 || kk < 0 || ii >= nx || jj >= ny || kk >= nz) return;
          const std::size_t m = room.linear(ii, jj, kk);
          if (!room.blocked(m)) sum += p[idx] - p[m];
        };
        add(i - 1, j, k);
        add(i + 1, j, k);
        add(i, j - 1, k);
        add(i, j + 1, k);
        add(i, j, k - 1);
        add(i, j, k + 1);
        out[idx] = sum;
      }
    }
  }
}

// Connected regions of open voxels; the projection is solvable on each only
// when its net outflow is zero.
std::vector<int> label_regions(const RoomGeometry& room, int& count) {
  std::vector<int> label(room.size(), -1);
  count = 0;
  std::vector<std::size_t> stack;
  for (std::size_t seed = 0; seed < room.size(); ++seed) {
    if (room.blocked(seed) || label[seed] >= 0) continue;
    label[seed] = count;
    stack.push_back(seed);
    while (!stack.empty()) {
      const auto v = room.unlinear(stack.back());
      stack.pop_back();
      const VoxelIndex nbs[6] = {{v.i - 1, v.j, v.k}, {v.i + 1, v.j, v.k}, {v.i, v.j - 1, v.k},
                                 {v.i, v.j + 1, v.k}, {v.i, v.j, v.k - 1}, {v.i, v.j, v.k + 1}};
      for (const auto& n : nbs) {
        if (!room.in_grid(n)) continue;
        const std::size_t m = room.linear(n);
        if (room.blocked(m) || label[m] >= 0) continue;
        label[m] = count;
        stack.push_back(m);
      }
    }
    ++count;
  }
  return label;
}

double sum_product(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t n = 0; n < a.size(); ++n) s += a[n] * b[n];
  return s;
}

// Conjugate gradients on A p = b, A the (semi-definite) graph Laplacian.
std::vector<double> solve_pressure(const RoomGeometry& room, std::vector<double> b) {
  int regions = 0;
  const auto label = label_regions(room, regions);
  std::vector<double> sum(regions, 0.0);
  std::vector<double> count(regions, 0.0);
  for (std::size_t n = 0; n < b.size(); ++n) {
    if (label[n] < 0) continue;
    sum[label[n]] += b[n];
    count[label[n]] += 1.0;
  }
  for (std::size_t n = 0; n < b.size(); ++n) {
    if (label[n] >= 0) b[n] -= sum[label[n]] / count[label[n]];
  }

  std::vector<double> p(b.size(), 0.0);
  std::vector<double> r = b;
  std::vector<double> d = r;
  std::vector<double> ad(b.size(), 0.0);
  double rr = sum_product(r, r);
  const double stop = 1e-24 * rr;
  const int max_iter = 4 * static_cast<int>(room.open_count()) + 200;
  for (int it = 0; it < max_iter && rr > stop; ++it) {
    apply_laplacian(room, d, ad);
    const double dad = sum_product(d, ad);
    if (!(dad > 0.0)) break;
    const double alpha = rr / dad;
    for (std::size_t n = 0; n < p.size(); ++n) {
      p[n] += alpha * d[n];
      r[n] -= alpha * ad[n];
    }
    const double next = sum_product(r, r);
    const double beta = next / rr;
    rr = next;
    for (std::size_t n = 0; n < d.size(); ++n) d[n] = r[n] + beta * d[n];
  }
  return p;
}

}  // namespace

FlowField::FlowField(const RoomGeometry& room, std::span<const VentilationDevice> devices)
    : nx_(room.nx()), ny_(room.ny()), nz_(room.nz()) {
  bool active = false;
  for (const auto& device : devices) active = active || (device.on && device.jet.speed_m_s > 0.0);
  if (!active) return;

  const double h = room.cell();
  auto jets = [&](const Vec3& p) {
    Vec3 v;
    for (const auto& device : devices) {
      if (device.on) v += jet_velocity(device, p);
    }
    return v;
  };
  auto open = [&](int i, int j, int k) { return !room.blocked(room.linear(i, j, k)); };

  ux_.assign(static_cast<std::size_t>(nx_ + 1) * ny_ * nz_, 0.0);
  uy_.assign(static_cast<std::size_t>(nx_) * (ny_ + 1) * nz_, 0.0);
  uz_.assign(static_cast<std::size_t>(nx_) * ny_ * (nz_ + 1), 0.0);
  for (int k = 0; k < nz_; ++k) {
    for (int j = 0; j < ny_; ++j) {
      for (int i = 0; i < nx_; ++i) {
        if (!open(i, j, k)) continue;
        const Vec3 c = room.center({i, j, k});
        if (i > 0 && open(i - 1, j, k)) ux_[x_face(i, j, k)] = jets({c.x - 0.5 * h, c.y, c.z}).x;
        if (j > 0 && open(i, j - 1, k)) uy_[y_face(i, j, k)] = jets({c.x, c.y - 0.5 * h, c.z}).y;
        if (k > 0 && open(i, j, k - 1)) uz_[z_face(i, j, k)] = jets({c.x, c.y, c.z - 0.5 * h}).z;
      }
    }
  }

  auto net_outflow = [&](int i, int j, int k) {
    return ux_[x_face(i + 1, j, k)] - ux_[x_face(i, j, k)] + uy_[y_face(i, j + 1, k)] - uy_[y_face(i, j, k)] +
           uz_[z_face(i, j, k + 1)] - uz_[z_face(i, j, k)];
  };
  std::vector<double> rhs(room.size(), 0.0);
  for (int k = 0; k < nz_; ++k) {
    for (int j = 0; j < ny_; ++j) {
      for (int i = 0; i < nx_; ++i) {
        if (open(i, j, k)) rhs[room.linear(i, j, k)] = -net_outflow(i, j, k);
      }
    }
  }
  const auto p = solve_pressure(room, std::move(rhs));
  for (int k = 0; k < nz_; ++k) {
    for (int j = 0; j < ny_; ++j) {
      for (int i = 0; i < nx_; ++i) {
        if (!open(i, j, k)) continue;
        const double here = p[room.linear(i, j, k)];
        if (i > 0 && open(i - 1, j, k)) ux_[x_face(i, j, k)] -= here - p[room.linear(i - 1, j, k)];
        if (j > 0 && open(i, j - 1, k)) uy_[y_face(i, j, k)] -= here - p[room.linear(i, j - 1, k)];
        if (k > 0 && open(i, j, k - 1)) uz_[z_face(i, j, k)] -= here - p[room.linear(i, j, k - 1)];
      }
    }
  }

  center_.assign(room.size(), Vec3{});
  for (int k = 0; k < nz_; ++k) {
    for (int j = 0; j < ny_; ++j) {
      for (int i = 0; i < nx_; ++i) {
        if (!open(i, j, k)) continue;
        const std::size_t idx = room.linear(i, j, k);
        const Vec3 v{0.5 * (ux_[x_face(i, j, k)] + ux_[x_face(i + 1, j, k)]),
                     0.5 * (uy_[y_face(i, j, k)] + uy_[y_face(i, j + 1, k)]),
                     0.5 * (uz_[z_face(i, j, k)] + uz_[z_face(i, j, k + 1)])};
        center_[idx] = v;
        max_speed_ = std::max(max_speed_, norm(v));
        const double out = std::max(ux_[x_face(i + 1, j, k)], 0.0) + std::max(-ux_[x_face(i, j, k)], 0.0) +
                           std::max(uy_[y_face(i, j + 1, k)], 0.0) + std::max(-uy_[y_face(i, j, k)], 0.0) +
                           std::max(uz_[z_face(i, j, k + 1)], 0.0) + std::max(-uz_[z_face(i, j, k)], 0.0);
        max_outflow_ = std::max(max_outflow_, out);
        max_divergence_ = std::max(max_divergence_, std::abs(net_outflow(i, j, k)));
      }
    }
  }
  any_ = max_outflow_ > 0.0;
}

}  // namespace airtwin::sim
