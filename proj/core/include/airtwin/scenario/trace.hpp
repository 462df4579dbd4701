#pragma once

#include <array>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "airtwin/game/heatmap.hpp"
#include "airtwin/scenario/scenario.hpp"

namespace airtwin::scenario {

/// Probe time series: one row per sample time, one column per probe id.
struct Trace {
  std::vector<std::string> columns;
  std::vector<double> t;
  std::vector<std::vector<double>> rows;

  /// Probe ids in CSV order: rows, then columns, then G, T, C.
  static std::vector<std::string> probe_columns(const ProbeLayout& probes);
  /// Appends every probe of the layout sampled from the field.
  void sample(const sim::ConcentrationField& field, const ProbeLayout& probes);
  bool operator==(const Trace&) const = default;
};

/// "t_s,<probe ids>" header then one line per row. Numbers are written in
/// shortest round-trip form.
void write_trace_csv(const Trace& trace, std::ostream& out);
void write_trace_csv(const Trace& trace, const std::filesystem::path& path);
/// Throws InvalidArgument on a malformed file.
Trace read_trace_csv(const std::filesystem::path& path);
Trace parse_trace_csv(std::istream& in);

/// Probe grid at one height, linearly interpolated in time between rows.
/// Throws InvalidArgument when t lies outside the trace or the trace lacks
/// the layer's columns.
game::HeatmapGrid render_heatmap(const Trace& trace, double t, HeightLayer layer);

/// Grid as CSV: a "<label>,c0,c1,..." header then "r<row>,..." lines.
void write_heatmap_csv(const game::HeatmapGrid& grid, std::ostream& out);
/// Binary PPM (P6), each cell a square colored with the bubble hue of its ppm.
void write_heatmap_ppm(const game::HeatmapGrid& grid, const std::filesystem::path& path, int cell_px = 40);
/// RGB of the bubble hue for a concentration.
std::array<unsigned char, 3> heat_color(double ppm);

}  // namespace airtwin::scenario
