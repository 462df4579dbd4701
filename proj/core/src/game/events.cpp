#include "airtwin/game/events.hpp"

#include "airtwin/error.hpp"

namespace airtwin::game {

std::string to_line(const Event& e) {
  std::string out = "{\"seq\":";
  out += std::to_string(e.seq);
  out += ",\"t\":";
  out += nlohmann::json(e.t).dump();
  out += ",\"kind\":";
  out += nlohmann::json(e.kind).dump();
  out += ",\"payload\":";
  out += e.payload.dump();
  out += "}";
  return out;
}

Event parse_line(const std::string& line) {
  const auto j = nlohmann::json::parse(line, nullptr, false);
  if (j.is_discarded() || !j.is_object() || !j.contains("seq") || !j.contains("t") || !j.contains("kind")) {
    throw InvalidArgument("malformed event record: " + line);
  }
  return Event{j["seq"].get<std::uint64_t>(), j["t"].get<double>(), j["kind"].get<std::string>(),
               j.value("payload", nlohmann::json::object())};
}

nlohmann::json to_json(const Event& e) {
  return nlohmann::json{{"seq", e.seq}, {"t", e.t}, {"kind", e.kind}, {"payload", e.payload}};
}

const Event& EventLog::append(double t, std::string kind, nlohmann::json payload) {
  events_.push_back(Event{last_seq() + 1, t, std::move(kind), std::move(payload)});
  return events_.back();
}

std::span<const Event> EventLog::since(std::uint64_t after) const {
  if (after >= last_seq()) return {};
  // seq n lives at index n - 1.
  return std::span<const Event>(events_).subspan(static_cast<std::size_t>(after));
}

std::string EventLog::to_ndjson() const {
  std::string out;
  for (const auto& e : events_) {
    out += to_line(e);
    out += '\n';
  }
  return out;
}

}  // namespace airtwin::game
