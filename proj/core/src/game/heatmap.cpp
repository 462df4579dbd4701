#include "airtwin/game/heatmap.hpp"

#include <algorithm>
#include <numeric>

namespace airtwin::game {

double HeatmapGrid::mean() const {
  if (ppm.empty()) return 0.0;
  return std::accumulate(ppm.begin(), ppm.end(), 0.0) / static_cast<double>(ppm.size());
}

double HeatmapGrid::max() const { return ppm.empty() ? 0.0 : *std::max_element(ppm.begin(), ppm.end()); }

HeatmapGrid heatmap_snapshot(const sim::ConcentrationField& field, const scenario::ProbeLayout& probes,
                             scenario::HeightLayer layer) {
  HeatmapGrid grid;
  grid.layer = layer;
  grid.height_m = probes.height(layer);
  grid.rows = probes.rows;
  grid.cols = probes.cols;
  grid.ppm.reserve(static_cast<std::size_t>(probes.rows) * probes.cols);
  const auto& dims = field.geometry().dims();
  for (int r = 0; r < probes.rows; ++r) {
    for (int c = 0; c < probes.cols; ++c) {
      grid.ppm.push_back(sim::sample(field, probes.position(dims, r, c, layer)));
    }
  }
  return grid;
}

}  // namespace airtwin::game
