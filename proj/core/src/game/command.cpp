#include "airtwin/game/command.hpp"

#include <array>
#include <utility>

namespace airtwin::game {
namespace {

constexpr std::array<std::pair<Verb, std::string_view>, 6> kVerbs{{
    {Verb::set_state, "set_state"},
    {Verb::aim, "aim"},
    {Verb::move_avatar, "move_avatar"},
    {Verb::place_bubble, "place_bubble"},
    {Verb::start, "start"},
    {Verb::stop, "stop"},
}};

}  // namespace

std::string_view to_string(Verb verb) {
  for (const auto& [v, name] : kVerbs) {
    if (v == verb) return name;
  }
  return "unknown";
}

std::optional<Verb> parse_verb(std::string_view text) {
  for (const auto& [v, name] : kVerbs) {
    if (name == text) return v;
  }
  return std::nullopt;
}

int http_status(CommandStatus status) {
  switch (status) {
    case CommandStatus::accepted:
      return 200;
    case CommandStatus::malformed:
      return 400;
    case CommandStatus::unknown_target:
      return 404;
    case CommandStatus::invalid_for_target:
      return 409;
  }
  return 500;
}

std::optional<Command> parse_command(const nlohmann::json& body, CommandResult& result) {
  auto reject = [&](std::string message) -> std::optional<Command> {
    result = {CommandStatus::malformed, std::move(message)};
    return std::nullopt;
  };
  if (!body.is_object()) return reject("command must be a JSON object");
  for (const auto& [key, _] : body.items()) {
    if (key != "session_id" && key != "target" && key != "verb" && key != "args") {
      return reject("unknown command field '" + key + "'");
    }
  }
  if (!body.contains("target") || !body["target"].is_string() || body["target"].get<std::string>().empty()) {
    return reject("command needs a non-empty string 'target'");
  }
  if (!body.contains("verb") || !body["verb"].is_string()) return reject("command needs a string 'verb'");
  const auto verb = parse_verb(body["verb"].get<std::string>());
  if (!verb) return reject("unknown verb '" + body["verb"].get<std::string>() + "'");

  Command cmd;
  cmd.target = body["target"].get<std::string>();
  cmd.verb = *verb;
  if (body.contains("session_id")) {
    if (!body["session_id"].is_string()) return reject("'session_id' must be a string");
    cmd.session_id = body["session_id"].get<std::string>();
  }
  if (body.contains("args")) {
    if (!body["args"].is_object()) return reject("'args' must be an object");
    cmd.args = body["args"];
  }
  result = {};
  return cmd;
}

nlohmann::json to_json(const Command& command) {
  nlohmann::json j{{"target", command.target}, {"verb", to_string(command.verb)}, {"args", command.args}};
  if (!command.session_id.empty()) j["session_id"] = command.session_id;
  return j;
}

}  // namespace airtwin::game
