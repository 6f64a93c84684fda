#include <tactile/ws_server.hpp>

#include <tactile/error.hpp>

#include <boost/asio/ip/tcp.hpp>
#include <boost/asio/post.hpp>
#include <boost/asio/strand.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>
#include <fmt/format.h>

#include <charconv>
#include <condition_variable>
#include <deque>
#include <mutex>
#include <thread>

namespace tactile {

namespace asio = boost::asio;
namespace beast = boost::beast;
namespace websocket = beast::websocket;
using tcp = asio::ip::tcp;

std::pair<std::string, std::uint16_t> parse_bind_address(const std::string& address)
{
	const auto colon = address.rfind(':');
	if (colon == std::string::npos || colon + 1 == address.size())
		throw Error(fmt::format("bind address '{}' is not host:port", address));
	std::string host = address.substr(0, colon);
	if (host.empty() || host == "localhost")
		host = "127.0.0.1";
	unsigned port = 0;
	const auto* first = address.data() + colon + 1;
	const auto* last = address.data() + address.size();
	auto [ptr, ec] = std::from_chars(first, last, port);
	if (ec != std::errc() || ptr != last || port > 65535)
		throw Error(fmt::format("bind address '{}' has an invalid port", address));
	return { host, static_cast<std::uint16_t>(port) };
}

namespace {

struct Connection
{
	explicit Connection(tcp::socket socket) : ws(std::move(socket)) {}

	websocket::stream<beast::tcp_stream> ws;
	beast::flat_buffer buffer;
	std::deque<std::string> outbox;
	bool writing = false;
	bool open = true;
	bool close_after_flush = false;
};

using ConnectionPtr = std::shared_ptr<Connection>;

} // namespace

struct WsServer::Impl
{
	struct Item
	{
		bool connect = false;
		ConnectionPtr connection;
		std::string frame;
	};

	Impl(Gateway& g, const std::string& bind) : gateway(g), strand(asio::make_strand(ioc)), acceptor(strand)
	{
		const auto [host, port] = parse_bind_address(bind);
		const tcp::endpoint endpoint(asio::ip::make_address(host), port);
		acceptor.open(endpoint.protocol());
		acceptor.set_option(asio::socket_base::reuse_address(true));
		acceptor.bind(endpoint);
		acceptor.listen(asio::socket_base::max_listen_connections);
	}

	Gateway& gateway;
	std::mutex gateway_mutex;

	asio::io_context ioc;
	asio::strand<asio::io_context::executor_type> strand;
	tcp::acceptor acceptor;
	std::thread io_thread;
	std::thread owner_thread;
	ConnectionPtr operator_connection; // strand only

	std::mutex queue_mutex;
	std::condition_variable queue_cv;
	std::deque<Item> queue;
	bool stopping = false;
	bool finished = false;
	bool started = false;

	// --- strand side ---

	void send(const ConnectionPtr& c, std::string text)
	{
		if (!c->open)
			return;
		c->outbox.push_back(std::move(text));
		if (!c->writing)
			write_next(c);
	}

	void write_next(const ConnectionPtr& c)
	{
		if (c->outbox.empty()) {
			c->writing = false;
			if (c->close_after_flush && c->open) {
				c->open = false;
				c->ws.async_close(websocket::close_code::try_again_later, [c](beast::error_code) {});
			}
			return;
		}
		c->writing = true;
		c->ws.text(true);
		c->ws.async_write(asio::buffer(c->outbox.front()), [this, c](beast::error_code ec, std::size_t) {
			c->outbox.pop_front();
			if (ec)
				drop(c);
			if (!c->open) {
				c->outbox.clear();
				c->writing = false;
				return;
			}
			write_next(c);
		});
	}

	// The outbox is left alone while a write is in flight; its completion releases it.
	void drop(const ConnectionPtr& c)
	{
		c->open = false;
		c->close_after_flush = false;
		if (!c->writing)
			c->outbox.clear();
		if (operator_connection == c)
			operator_connection.reset();
	}

	void do_accept()
	{
		acceptor.async_accept(strand, [this](beast::error_code ec, tcp::socket socket) {
			if (ec)
				return; // acceptor closed
			auto c = std::make_shared<Connection>(std::move(socket));
			c->ws.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
			c->ws.async_accept([this, c](beast::error_code hec) { on_handshake(c, hec); });
			do_accept();
		});
	}

	void on_handshake(const ConnectionPtr& c, beast::error_code ec)
	{
		if (ec)
			return;
		if (operator_connection && operator_connection->open) {
			std::string text;
			{
				std::lock_guard lock(gateway_mutex);
				text = encode(gateway.error_event("operator_busy", "another operator is already connected"));
			}
			c->close_after_flush = true;
			send(c, std::move(text));
			return;
		}
		operator_connection = c;
		enqueue(Item{ true, c, {} }, true);
		do_read(c);
	}

	void do_read(const ConnectionPtr& c)
	{
		c->ws.async_read(c->buffer, [this, c](beast::error_code ec, std::size_t) {
			if (ec) {
				drop(c);
				return;
			}
			const std::string message = beast::buffers_to_string(c->buffer.data());
			c->buffer.consume(c->buffer.size());
			size_t start = 0;
			while (start <= message.size()) {
				size_t end = message.find('\n', start);
				if (end == std::string::npos)
					end = message.size();
				std::string frame = message.substr(start, end - start);
				if (frame.find_first_not_of(" \t\r") != std::string::npos && !enqueue(Item{ false, c, frame }, false)) {
					std::lock_guard lock(gateway_mutex);
					send(c, encode(gateway.error_event("queue_full",
						fmt::format("command queue holds {} commands; command refused", kQueueDepth))));
				}
				start = end + 1;
			}
			do_read(c);
		});
	}

	// --- queue ---

	bool enqueue(Item item, bool force)
	{
		{
			std::lock_guard lock(queue_mutex);
			if (!force && queue.size() >= kQueueDepth)
				return false;
			queue.push_back(std::move(item));
		}
		queue_cv.notify_all();
		return true;
	}

	void owner_loop()
	{
		for (;;) {
			Item item;
			{
				std::unique_lock lock(queue_mutex);
				queue_cv.wait(lock, [this] { return stopping || !queue.empty(); });
				if (stopping)
					return;
				item = std::move(queue.front());
				queue.pop_front();
			}

			bool done = false;
			{
				std::lock_guard lock(gateway_mutex);
				auto events = item.connect ? gateway.connect() : gateway.handle_frame(item.frame);
				std::vector<std::string> frames;
				for (const auto& e : events)
					frames.push_back(encode(e));
				asio::post(strand, [this, c = item.connection, frames = std::move(frames)]() mutable {
					for (auto& f : frames)
						send(c, std::move(f));
				});
				done = gateway.finished();
			}
			if (done) {
				std::lock_guard lock(queue_mutex);
				finished = true;
				queue_cv.notify_all();
			}
		}
	}
};

WsServer::WsServer(Gateway& gateway, const std::string& bind_address)
	: impl_(std::make_unique<Impl>(gateway, bind_address))
{
}

WsServer::~WsServer() { stop(); }

void WsServer::start()
{
	if (impl_->started)
		return;
	impl_->started = true;
	asio::post(impl_->strand, [this] { impl_->do_accept(); });
	impl_->io_thread = std::thread([this] { impl_->ioc.run(); });
	impl_->owner_thread = std::thread([this] { impl_->owner_loop(); });
}

void WsServer::stop()
{
	if (!impl_ || !impl_->started)
		return;
	impl_->started = false;
	{
		std::lock_guard lock(impl_->queue_mutex);
		impl_->stopping = true;
	}
	impl_->queue_cv.notify_all();
	if (impl_->owner_thread.joinable())
		impl_->owner_thread.join();

	asio::post(impl_->strand, [this] {
		beast::error_code ec;
		impl_->acceptor.close(ec);
		if (auto c = impl_->operator_connection) {
			beast::get_lowest_layer(c->ws).socket().close(ec);
			impl_->operator_connection.reset();
		}
	});
	// Give the strand a moment to flush pending writes before tearing the loop down.
	std::this_thread::sleep_for(std::chrono::milliseconds(50));
	impl_->ioc.stop();
	if (impl_->io_thread.joinable())
		impl_->io_thread.join();
}

std::uint16_t WsServer::port() const { return impl_->acceptor.local_endpoint().port(); }

void WsServer::wait_until_finished()
{
	{
		std::unique_lock lock(impl_->queue_mutex);
		impl_->queue_cv.wait(lock, [this] { return impl_->finished || impl_->stopping; });
	}
	// Let the final events reach the client.
	std::this_thread::sleep_for(std::chrono::milliseconds(250));
}

} // namespace tactile
