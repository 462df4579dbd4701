#pragma once

#include <optional>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

namespace airtwin::game {

enum class Verb { set_state, aim, move_avatar, place_bubble, start, stop };

std::string_view to_string(Verb verb);
std::optional<Verb> parse_verb(std::string_view text);

/// A player or client action. Applied by the session at a tick boundary.
struct Command {
  /// Empty means the service's active session.
  std::string session_id;
  std::string target;
  Verb verb = Verb::set_state;
  nlohmann::json args = nlohmann::json::object();
};

enum class CommandStatus {
  accepted,
  malformed,           // bad shape or arguments
  unknown_target,      // no such device, bubble or session
  invalid_for_target,  // verb does not apply to this target (or not now)
};

struct CommandResult {
  CommandStatus status = CommandStatus::accepted;
  std::string message;
  /// Resulting state of the target after an accepted command.
  nlohmann::json state;
  bool ok() const { return status == CommandStatus::accepted; }
};

/// HTTP status used on the wire for each outcome: 200, 400, 404, 409.
int http_status(CommandStatus status);

/// Parses {"session_id"?, "target", "verb", "args"?}. Shape errors come back
/// as a malformed result with no command.
std::optional<Command> parse_command(const nlohmann::json& body, CommandResult& result);

nlohmann::json to_json(const Command& command);

}  // namespace airtwin::game
