#include <benchmark/benchmark.h>

#include <memory>
#include <vector>

#include "airtwin/bubble/bubble.hpp"
#include "airtwin/game/payload.hpp"
#include "airtwin/sim/field.hpp"
#include "airtwin/sim/flow.hpp"
#include "airtwin/sim/solver.hpp"

using namespace airtwin;

namespace {

struct Room {
  std::shared_ptr<const sim::RoomGeometry> geometry;
  sim::ConcentrationField field;
  std::vector<sim::Source> sources;
  std::vector<sim::VentilationDevice> devices;
};

/// n x (5n/4) x (3n/4) voxels of 0.5 m with one occupant and one fan.
Room make_room(int n, bool fan_on) {
  const double h = 0.5;
  auto g = std::make_shared<const sim::RoomGeometry>(Vec3{n * h, n * 1.25 * h, n * 0.75 * h}, h);
  Room r{g, sim::ConcentrationField(g, 600.0), {}, {}};
  sim::Source occ;
  occ.id = "occ";
  occ.position = {1.0, 1.0, 0.75};
  occ.emission_rate = 5e-6;
  r.sources.push_back(occ);
  sim::VentilationDevice fan;
  fan.id = "fan";
  fan.kind = sim::DeviceKind::pedestal_fan;
  fan.position = {g->dims().x / 2, g->dims().y / 2, 0.75};
  fan.orientation = {1.0, 0.0, 0.0};
  fan.jet = {2.0, 0.4, 3.0};
  fan.on = fan_on;
  r.devices.push_back(fan);
  return r;
}

void BM_StepInPlace(benchmark::State& state) {
  auto r = make_room(static_cast<int>(state.range(0)), state.range(1) != 0);
  const sim::FlowField flow(*r.geometry, r.devices);
  const sim::SimParams p;
  for (auto _ : state) {
    sim::step_in_place(r.field, r.sources, r.devices, flow, p, p.dt);
    benchmark::DoNotOptimize(r.field.values().data());
  }
  state.counters["voxels"] = static_cast<double>(r.geometry->size());
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(r.geometry->size()));
}
BENCHMARK(BM_StepInPlace)->Args({8, 0})->Args({16, 0})->Args({16, 1})->Args({32, 1});

void BM_FlowField(benchmark::State& state) {
  auto r = make_room(static_cast<int>(state.range(0)), true);
  for (auto _ : state) {
    sim::FlowField flow(*r.geometry, r.devices);
    benchmark::DoNotOptimize(flow.max_speed());
  }
}
BENCHMARK(BM_FlowField)->Arg(16)->Arg(32);

void BM_Sample(benchmark::State& state) {
  auto r = make_room(16, false);
  for (std::size_t i = 0; i < r.field.values().size(); ++i) r.field.values()[i] += static_cast<double>(i % 97);
  const Vec3 dims = r.geometry->dims();
  double u = 0.0;
  for (auto _ : state) {
    u += 0.618033988749895;
    if (u > 1.0) u -= 1.0;
    benchmark::DoNotOptimize(sim::sample(r.field, {dims.x * u, dims.y * (1.0 - u), dims.z * 0.5}));
  }
}
BENCHMARK(BM_Sample);

void BM_BubbleVisual(benchmark::State& state) {
  double ppm = 350.0;
  for (auto _ : state) {
    ppm = ppm > 3100.0 ? 350.0 : ppm + 7.3;
    benchmark::DoNotOptimize(bubble::bubble_visual(ppm));
  }
}
BENCHMARK(BM_BubbleVisual);

void BM_SerializeReading(benchmark::State& state) {
  const sensor::Reading r{"wrist-1", 65.0, 812.5, 25.0, 50.0, sensor::ReadingStatus::ok};
  for (auto _ : state) benchmark::DoNotOptimize(game::serialize_reading(r));
}
BENCHMARK(BM_SerializeReading);

}  // namespace

BENCHMARK_MAIN();
