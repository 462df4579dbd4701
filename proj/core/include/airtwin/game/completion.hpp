#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>

namespace airtwin::game {

struct MonitoredValue {
  std::string key;
  /// Latest reading; +inf when the point has no reading yet.
  double ppm = 0.0;
};

struct CompletionRule {
  double target_ppm = 800.0;
  double sustain_s = 60.0;
};

/// Tracks how long each monitored point has continuously read at or below the
/// target. Satisfied once every point has held for the sustain window.
class CompletionTracker {
 public:
  explicit CompletionTracker(CompletionRule rule = {}) : rule_(rule) {}

  /// Records the monitored set at `now`. Points missing from `values` are
  /// forgotten. Returns satisfied().
  bool observe(double now, std::span<const MonitoredValue> values);

  /// Non-empty monitored set, every point held <= target for sustain_s.
  bool satisfied() const { return satisfied_; }
  std::optional<double> held_since(const std::string& key) const;
  const CompletionRule& rule() const { return rule_; }

 private:
  CompletionRule rule_;
  std::map<std::string, double> below_since_;
  bool satisfied_ = false;
};

}  // namespace airtwin::game
