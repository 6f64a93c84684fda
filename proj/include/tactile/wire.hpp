#pragma once

#include <tactile/error.hpp>
#include <tactile/session.hpp>

#include <json.hpp>

#include <cstdint>
#include <string>
#include <string_view>

namespace tactile {

/// Frame could not be decoded (bad JSON, unknown kind, missing field).
class WireError : public Error
{
public:
	using Error::Error;
};

enum class EventKind { Snapshot, Prompt, FtLive, TrialResult, SessionEnd, Error, Ack };
enum class CommandKind { Confirm, Text, Select, Escape };

std::string_view to_string(EventKind kind);
std::string_view to_string(CommandKind kind);

struct WireEvent
{
	EventKind kind = EventKind::Snapshot;
	std::uint64_t seq = 0;
	nlohmann::json payload = nlohmann::json::object();
};

struct WireCommand
{
	CommandKind kind = CommandKind::Confirm;
	std::string request_id;
	nlohmann::json payload = nlohmann::json::object();
};

/// One JSON object followed by '\n'.
std::string encode(const WireEvent& event);
WireEvent decode_event(std::string_view frame);

nlohmann::json to_json(const WireCommand& command);
std::string encode(const WireCommand& command);
/// Throws WireError for malformed JSON, a missing request_id or an unknown kind.
WireCommand decode_command(std::string_view frame);
WireCommand command_from_json(const nlohmann::json& j);

/// Throws WireError when the payload does not fit the kind.
OperatorEvent to_operator_event(const WireCommand& command);
WireCommand to_wire_command(const OperatorEvent& event, std::string request_id);

} // namespace tactile
