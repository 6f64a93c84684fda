#pragma once

#include <tactile/gateway.hpp>

#include <cstdint>
#include <memory>
#include <string>

namespace tactile {

/// WebSocket front end for a Gateway. Frames are newline-delimited JSON text messages.
/// One operator connection at a time; further connections receive an error event and are closed.
/// Commands wait in a bounded queue (kQueueDepth) and are applied one at a time on a dedicated
/// owner thread; overflow is refused with a "queue_full" error event.
class WsServer
{
public:
	static constexpr std::size_t kQueueDepth = 16;

	/// `bind_address` is "host:port"; port 0 picks a free port.
	WsServer(Gateway& gateway, const std::string& bind_address);
	~WsServer();

	WsServer(const WsServer&) = delete;
	WsServer& operator=(const WsServer&) = delete;

	void start();
	void stop();
	std::uint16_t port() const;

	/// Blocks until the session reaches a terminal phase and its final events were queued for sending.
	void wait_until_finished();

private:
	struct Impl;
	std::unique_ptr<Impl> impl_;
};

/// Splits "host:port". Throws Error on a malformed address.
std::pair<std::string, std::uint16_t> parse_bind_address(const std::string& address);

} // namespace tactile
