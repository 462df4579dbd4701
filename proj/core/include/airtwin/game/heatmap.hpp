#pragma once

#include <string_view>
#include <vector>

#include "airtwin/scenario/scenario.hpp"
#include "airtwin/sim/field.hpp"

namespace airtwin::game {

/// Concentrations on the probe grid at one height layer, row-major.
struct HeatmapGrid {
  scenario::HeightLayer layer = scenario::HeightLayer::table;
  double height_m = 0.0;
  int rows = 0;
  int cols = 0;
  std::vector<double> ppm;

  double at(int row, int col) const { return ppm[static_cast<std::size_t>(row) * cols + col]; }
  double mean() const;
  double max() const;
};

HeatmapGrid heatmap_snapshot(const sim::ConcentrationField& field, const scenario::ProbeLayout& probes,
                             scenario::HeightLayer layer);

}  // namespace airtwin::game
