#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace airtwin::game {

/// One record of the session log. Sequence numbers start at 1 and are gapless.
struct Event {
  std::uint64_t seq = 0;
  double t = 0.0;
  std::string kind;
  nlohmann::json payload;

  bool operator==(const Event&) const = default;
};

/// {"seq":..,"t":..,"kind":..,"payload":..} on one line, keys in that order.
std::string to_line(const Event& event);
Event parse_line(const std::string& line);
nlohmann::json to_json(const Event& event);

class EventLog {
 public:
  const Event& append(double t, std::string kind, nlohmann::json payload);

  std::span<const Event> events() const { return events_; }
  std::uint64_t last_seq() const { return events_.empty() ? 0 : events_.back().seq; }
  /// Events with seq > after.
  std::span<const Event> since(std::uint64_t after) const;
  /// Newline-delimited records, one per event.
  std::string to_ndjson() const;

 private:
  std::vector<Event> events_;
};

}  // namespace airtwin::game
