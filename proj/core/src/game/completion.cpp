#include "airtwin/game/completion.hpp"

#include <set>

namespace airtwin::game {

bool CompletionTracker::observe(double now, std::span<const MonitoredValue> values) {
  std::set<std::string> seen;
  bool all_held = !values.empty();
  for (const auto& v : values) {
    seen.insert(v.key);
    if (v.ppm <= rule_.target_ppm) {
      const auto [it, inserted] = below_since_.emplace(v.key, now);
      all_held = all_held && now - it->second >= rule_.sustain_s;
    } else {
      below_since_.erase(v.key);
      all_held = false;
    }
  }
  std::erase_if(below_since_, [&](const auto& kv) { return !seen.contains(kv.first); });
  satisfied_ = all_held;
  return satisfied_;
}

std::optional<double> CompletionTracker::held_since(const std::string& key) const {
  if (auto it = below_since_.find(key); it != below_since_.end()) return it->second;
  return std::nullopt;
}

}  // namespace airtwin::game
