#include "airtwin/scenario/trace.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "airtwin/bubble/bubble.hpp"
#include "airtwin/error.hpp"

namespace airtwin::scenario {
namespace {

std::string number(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

double parse_number(const std::string& text, std::size_t line) {
  double v = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
    throw InvalidArgument("trace line " + std::to_string(line) + ": bad number '" + text + "'");
  }
  return v;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

std::vector<std::string> Trace::probe_columns(const ProbeLayout& probes) {
  std::vector<std::string> out;
  for (int r = 0; r < probes.rows; ++r) {
    for (int c = 0; c < probes.cols; ++c) {
      for (auto layer : kAllLayers) out.push_back(ProbeLayout::probe_id(r, c, layer));
    }
  }
  return out;
}

void Trace::sample(const sim::ConcentrationField& field, const ProbeLayout& probes) {
  std::vector<double> row;
  const auto& dims = field.geometry().dims();
  for (int r = 0; r < probes.rows; ++r) {
    for (int c = 0; c < probes.cols; ++c) {
      for (auto layer : kAllLayers) row.push_back(sim::sample(field, probes.position(dims, r, c, layer)));
    }
  }
  t.push_back(field.t);
  rows.push_back(std::move(row));
}

void write_trace_csv(const Trace& trace, std::ostream& out) {
  out << "t_s";
  for (const auto& c : trace.columns) out << ',' << c;
  out << '\n';
  for (std::size_t n = 0; n < trace.rows.size(); ++n) {
    out << number(trace.t[n]);
    for (double v : trace.rows[n]) out << ',' << number(v);
    out << '\n';
  }
}

void write_trace_csv(const Trace& trace, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  write_trace_csv(trace, out);
}

Trace parse_trace_csv(std::istream& in) {
  Trace trace;
  std::string line;
  if (!std::getline(in, line)) throw InvalidArgument("trace is empty");
  auto header = split(line);
  if (header.empty() || header.front() != "t_s") throw InvalidArgument("trace header must start with t_s");
  trace.columns.assign(header.begin() + 1, header.end());
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto cells = split(line);
    if (cells.size() != header.size()) {
      throw InvalidArgument("trace line " + std::to_string(line_no) + ": expected " + std::to_string(header.size()) +
                            " fields, got " + std::to_string(cells.size()));
    }
    const double t = parse_number(cells[0], line_no);
    if (!trace.t.empty() && !(t > trace.t.back())) {
      throw InvalidArgument("trace line " + std::to_string(line_no) + ": times must increase");
    }
    trace.t.push_back(t);
    std::vector<double> row;
    for (std::size_t c = 1; c < cells.size(); ++c) row.push_back(parse_number(cells[c], line_no));
    trace.rows.push_back(std::move(row));
  }
  return trace;
}

Trace read_trace_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open trace " + path.string());
  return parse_trace_csv(in);
}

game::HeatmapGrid render_heatmap(const Trace& trace, double t, HeightLayer layer) {
  if (trace.t.empty()) throw InvalidArgument("trace has no samples");
  if (!(t >= trace.t.front() && t <= trace.t.back())) {
    throw InvalidArgument("t = " + number(t) + " s is outside the trace [" + number(trace.t.front()) + ", " +
                          number(trace.t.back()) + "]");
  }
  const auto hi = static_cast<std::size_t>(std::lower_bound(trace.t.begin(), trace.t.end(), t) - trace.t.begin());
  const std::size_t lo = trace.t[hi] == t || hi == 0 ? hi : hi - 1;
  const double w = lo == hi ? 0.0 : (t - trace.t[lo]) / (trace.t[hi] - trace.t[lo]);

  const std::string suffix = std::string("_") + label(layer);
  int rows = 0;
  int cols = 0;
  std::vector<std::pair<std::pair<int, int>, std::size_t>> cells;
  for (std::size_t n = 0; n < trace.columns.size(); ++n) {
    const auto& id = trace.columns[n];
    if (id.size() <= suffix.size() || id.compare(id.size() - suffix.size(), suffix.size(), suffix) != 0) continue;
    int r = 0;
    int c = 0;
    if (std::sscanf(id.c_str(), "r%dc%d_", &r, &c) != 2) continue;
    rows = std::max(rows, r + 1);
    cols = std::max(cols, c + 1);
    cells.push_back({{r, c}, n});
  }
  if (cells.empty() || cells.size() != static_cast<std::size_t>(rows) * cols) {
    throw InvalidArgument(std::string("trace has no complete probe grid for height ") + label(layer));
  }
  game::HeatmapGrid grid;
  grid.layer = layer;
  grid.rows = rows;
  grid.cols = cols;
  grid.ppm.assign(cells.size(), 0.0);
  for (const auto& [rc, n] : cells) {
    const double v = std::lerp(trace.rows[lo][n], trace.rows[hi][n], w);
    grid.ppm[static_cast<std::size_t>(rc.first) * cols + rc.second] = v;
  }
  return grid;
}

void write_heatmap_csv(const game::HeatmapGrid& grid, std::ostream& out) {
  out << label(grid.layer);
  for (int c = 0; c < grid.cols; ++c) out << ",c" << c;
  out << '\n';
  for (int r = 0; r < grid.rows; ++r) {
    out << 'r' << r;
    for (int c = 0; c < grid.cols; ++c) out << ',' << number(grid.at(r, c));
    out << '\n';
  }
}

std::array<unsigned char, 3> heat_color(double ppm) {
  // HSV with full saturation and value; hue from the bubble law.
  const double h = bubble::bubble_visual(ppm).hue_deg / 60.0;
  const double x = 1.0 - std::abs(std::fmod(h, 2.0) - 1.0);
  double r = 0.0;
  double g = 0.0;
  if (h < 1.0) {
    r = 1.0;
    g = x;
  } else {
    r = x;
    g = 1.0;
  }
  auto byte = [](double v) { return static_cast<unsigned char>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0)); };
  return {byte(r), byte(g), 0};
}

void write_heatmap_ppm(const game::HeatmapGrid& grid, const std::filesystem::path& path, int cell_px) {
  if (cell_px <= 0) throw InvalidArgument("cell_px must be positive");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  const int w = grid.cols * cell_px;
  const int h = grid.rows * cell_px;
  out << "P6\n" << w << ' ' << h << "\n255\n";
  // Row 0 at the bottom so the image reads like a floor plan with y up.
  for (int py = h - 1; py >= 0; --py) {
    for (int px = 0; px < w; ++px) {
      const auto rgb = heat_color(grid.at(py / cell_px, px / cell_px));
      out.write(reinterpret_cast<const char*>(rgb.data()), 3);
    }
  }
}

}  // namespace airtwin::scenario
