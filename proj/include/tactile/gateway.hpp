#pragma once

#include <tactile/runner.hpp>
#include <tactile/wire.hpp>

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace tactile {

/// Transport-independent half of the operator service: turns command frames into session
/// transitions and transitions into numbered wire events. Not thread-safe; one owner drives it.
class Gateway
{
public:
	explicit Gateway(SessionRunner& runner);

	/// A full snapshot for a newly connected client.
	std::vector<WireEvent> connect();

	/// Handles one newline-free command frame. Malformed frames yield an error event; a repeated
	/// request_id yields the original acknowledgment again without touching the session.
	std::vector<WireEvent> handle_frame(std::string_view frame);

	/// Event for refusals decided outside the gateway (busy operator slot, full queue).
	WireEvent error_event(std::string_view code, std::string_view message, std::string_view request_id = {});

	nlohmann::json snapshot_payload() const;
	bool finished() const { return runner_.finished(); }
	const SessionRunner& runner() const { return runner_; }

	/// Minimum virtual time between two ft_live events, s.
	static constexpr double kFtLivePeriod = 0.1;

private:
	WireEvent make(EventKind kind, nlohmann::json payload);
	void translate(const std::vector<SessionEvent>& events, std::vector<WireEvent>& out);

	SessionRunner& runner_;
	std::uint64_t seq_ = 0;
	std::map<std::string, nlohmann::json> acks_;
	double last_ft_time_ = -1.0;
};

} // namespace tactile
