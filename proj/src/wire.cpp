#include <tactile/wire.hpp>

#include <fmt/format.h>

namespace tactile {

using nlohmann::json;

namespace {

template <class... Ts>
struct overloaded : Ts...
{
	using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

constexpr EventKind kEventKinds[] = { EventKind::Snapshot, EventKind::Prompt, EventKind::FtLive,
	EventKind::TrialResult, EventKind::SessionEnd, EventKind::Error, EventKind::Ack };
constexpr CommandKind kCommandKinds[] = { CommandKind::Confirm, CommandKind::Text, CommandKind::Select,
	CommandKind::Escape };

} // namespace

std::string_view to_string(EventKind kind)
{
	switch (kind) {
	case EventKind::Snapshot: return "snapshot";
	case EventKind::Prompt: return "prompt";
	case EventKind::FtLive: return "ft_live";
	case EventKind::TrialResult: return "trial_result";
	case EventKind::SessionEnd: return "session_end";
	case EventKind::Error: return "error";
	case EventKind::Ack: return "ack";
	}
	return "?";
}

std::string_view to_string(CommandKind kind)
{
	switch (kind) {
	case CommandKind::Confirm: return "confirm";
	case CommandKind::Text: return "text";
	case CommandKind::Select: return "select";
	case CommandKind::Escape: return "escape";
	}
	return "?";
}

std::string encode(const WireEvent& event)
{
	json j{ { "kind", to_string(event.kind) }, { "seq", event.seq }, { "payload", event.payload } };
	return j.dump() + "\n";
}

WireEvent decode_event(std::string_view frame)
{
	try {
		const auto j = json::parse(frame);
		WireEvent e;
		const auto kind = j.at("kind").get<std::string>();
		bool known = false;
		for (auto k : kEventKinds)
			if (to_string(k) == kind) {
				e.kind = k;
				known = true;
			}
		if (!known)
			throw WireError(fmt::format("unknown event kind \"{}\"", kind));
		e.seq = j.at("seq").get<std::uint64_t>();
		e.payload = j.at("payload");
		return e;
	}
	catch (const json::exception& ex) {
		throw WireError(fmt::format("malformed event frame: {}", ex.what()));
	}
}

json to_json(const WireCommand& c)
{
	return { { "kind", to_string(c.kind) }, { "request_id", c.request_id }, { "payload", c.payload } };
}

std::string encode(const WireCommand& command) { return to_json(command).dump() + "\n"; }

WireCommand command_from_json(const json& j)
{
	if (!j.is_object())
		throw WireError("command frame is not a JSON object");
	const auto kind_it = j.find("kind");
	if (kind_it == j.end() || !kind_it->is_string())
		throw WireError("command frame lacks a string \"kind\"");
	const auto id_it = j.find("request_id");
	if (id_it == j.end() || !id_it->is_string() || id_it->get<std::string>().empty())
		throw WireError("command frame lacks a non-empty string \"request_id\"");

	WireCommand c;
	const auto kind = kind_it->get<std::string>();
	bool known = false;
	for (auto k : kCommandKinds)
		if (to_string(k) == kind) {
			c.kind = k;
			known = true;
		}
	if (!known)
		throw WireError(fmt::format("unknown command kind \"{}\"", kind));
	c.request_id = id_it->get<std::string>();
	if (const auto p = j.find("payload"); p != j.end()) {
		if (!p->is_object())
			throw WireError("command payload must be an object");
		c.payload = *p;
	}
	return c;
}

WireCommand decode_command(std::string_view frame)
{
	json j;
	try {
		j = json::parse(frame);
	}
	catch (const json::exception& ex) {
		throw WireError(fmt::format("malformed command frame: {}", ex.what()));
	}
	return command_from_json(j);
}

OperatorEvent to_operator_event(const WireCommand& c)
{
	const auto field = [&](const char* key, json::value_t type) -> const json& {
		const auto it = c.payload.find(key);
		if (it == c.payload.end() || it->type() != type)
			throw WireError(fmt::format("{} command needs payload field \"{}\"", to_string(c.kind), key));
		return *it;
	};
	switch (c.kind) {
	case CommandKind::Confirm:
		return Confirm{ field("yes", json::value_t::boolean).get<bool>() };
	case CommandKind::Text:
		return TextInput{ field("text", json::value_t::string).get<std::string>() };
	case CommandKind::Select: {
		const auto name = field("option", json::value_t::string).get<std::string>();
		const auto option = parse_option(name);
		if (!option)
			throw WireError(fmt::format("unknown option \"{}\"", name));
		return SelectOption{ *option };
	}
	case CommandKind::Escape:
		return Escape{};
	}
	throw WireError("unknown command kind");
}

WireCommand to_wire_command(const OperatorEvent& event, std::string request_id)
{
	WireCommand c;
	c.request_id = std::move(request_id);
	std::visit(overloaded{
		[&](const Confirm& e) { c.kind = CommandKind::Confirm; c.payload = { { "yes", e.yes } }; },
		[&](const TextInput& e) { c.kind = CommandKind::Text; c.payload = { { "text", e.text } }; },
		[&](const SelectOption& e) { c.kind = CommandKind::Select; c.payload = { { "option", to_string(e.option) } }; },
		[&](const Escape&) { c.kind = CommandKind::Escape; c.payload = json::object(); } }, event);
	return c;
}

} // namespace tactile
