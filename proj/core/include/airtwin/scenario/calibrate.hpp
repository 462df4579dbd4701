#pragma once

#include <vector>

#include "airtwin/scenario/scenario.hpp"

namespace airtwin::scenario {

struct CalibrationTarget {
  double ppm = 1635.0;
  double minutes = 90.0;
  HeightLayer layer = HeightLayer::table;
  /// Stop once |achieved - ppm| is within this.
  double tolerance_ppm = 1.0;
  int max_iterations = 20;
};

struct CalibrationResult {
  double emission_scale = 1.0;
  double achieved_ppm = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Highest concentration among the four corner probes of the grid at a layer.
double corner_max(const sim::ConcentrationField& field, const ProbeLayout& probes, HeightLayer layer);

/// Field-only run of the scenario's sources and device schedules; returns the
/// corner maximum at each requested minute (ascending).
std::vector<double> corner_series(const Scenario& scenario, const std::vector<double>& minutes, HeightLayer layer);

/// Secant search on params.emission_scale, falling back to bisection, until
/// the corner maximum at the target minute matches the target ppm.
/// Throws InvalidArgument when no scale can reach the target (it lies below
/// the source-free value).
CalibrationResult calibrate(const Scenario& scenario, const CalibrationTarget& target);

}  // namespace airtwin::scenario
