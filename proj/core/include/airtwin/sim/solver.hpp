#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "airtwin/sim/field.hpp"
#include "airtwin/sim/flow.hpp"

namespace airtwin::sim {

enum class SourceKind { occupant, candle, heated_baking_soda, cooking };

std::string_view to_string(SourceKind kind);
SourceKind parse_source_kind(std::string_view name);
double default_emission_rate(SourceKind kind);

/// Half-open activity window [on_s, off_s) in scenario seconds.
struct ActiveInterval {
  double on_s = 0.0;
  double off_s = 0.0;
  bool operator==(const ActiveInterval&) const = default;
};

struct Source {
  std::string id;
  SourceKind kind = SourceKind::occupant;
  Vec3 position;
  /// m^3 of CO2 per second.
  double emission_rate = 0.0;
  /// Empty means always active.
  std::vector<ActiveInterval> schedule;

  bool operator==(const Source&) const = default;
};

/// Seconds of activity of `source` inside [t0, t1).
double active_seconds(const Source& source, double t0, double t1);

struct SimParams {
  double molecular_diffusivity = 1.6e-5;
  double turbulent_diffusivity = 5e-3;
  /// Downward drift of CO2-enriched air (m/s), applied to the excess over ambient.
  double settling_velocity = 2e-3;
  double ambient_ppm = 400.0;
  double dt = 0.5;
  double time_scale = 1.0;
  /// Multiplier on every source emission rate; the calibration knob.
  double emission_scale = 1.0;
  bool allow_substeps = true;

  double diffusivity() const { return molecular_diffusivity + turbulent_diffusivity; }
  bool operator==(const SimParams&) const = default;
};

void validate(const SimParams& params);

/// Largest dt satisfying every explicit bound:
///   h^2 / (6 D), h / (max voxel outflow + settling), 1 / max exchange rate.
double stable_dt(const RoomGeometry& room, const FlowField& flow, std::span<const VentilationDevice> devices,
                 const SimParams& params);

/// Number of equal substeps needed to advance dt within the stability bound.
int substep_count(double dt, double bound);

/// Advances the field by dt. Each substep applies, in order: source injection,
/// donor-cell advection by the device flow, upwind settling of the excess over
/// ambient, 7-point diffusion with no-flux walls, and relaxation of open
/// aperture voxels toward ambient.
/// Throws StabilityError when dt needs substeps and params.allow_substeps is
/// false, SolverFault on a non-finite result (the input field is untouched).
ConcentrationField step(const ConcentrationField& field, std::span<const Source> sources,
                        std::span<const VentilationDevice> devices, const SimParams& params, double dt);

/// Same as step() with a precomputed flow field for `devices`.
void step_in_place(ConcentrationField& field, std::span<const Source> sources,
                   std::span<const VentilationDevice> devices, const FlowField& flow, const SimParams& params,
                   double dt);

}  // namespace airtwin::sim
