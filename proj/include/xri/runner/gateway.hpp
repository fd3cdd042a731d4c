#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <future>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <thread>

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>
#include <nlohmann/json.hpp>

#include "xri/core/error.hpp"

namespace xri::runner {

/// WebSocket endpoint for operator panels. Pushes snapshot messages (a
/// lagging client only gets the latest one) and hands inbound control
/// messages to `inject`. Everything runs on one I/O thread.
class LiveGateway {
 public:
  /// Throws xri::Error for messages it cannot accept.
  using Inject = std::function<void(const nlohmann::json&)>;

  LiveGateway(std::uint16_t port, Inject inject, const std::string& host = "127.0.0.1")
      : inject_(std::move(inject)), acceptor_(ioc_) {
    namespace asio = boost::asio;
    boost::system::error_code ec;
    const asio::ip::tcp::endpoint ep(asio::ip::make_address(host, ec), port);
    if (ec) throw Error(ErrorCode::InvalidArgument, "gateway: bad address '" + host + "'");
    acceptor_.open(ep.protocol(), ec);
    if (!ec) acceptor_.set_option(asio::socket_base::reuse_address(true), ec);
    if (!ec) acceptor_.bind(ep, ec);
    if (!ec) acceptor_.listen(asio::socket_base::max_listen_connections, ec);
    if (ec) throw Error(ErrorCode::PortInUse, "gateway: cannot listen on port " + std::to_string(port) + ": " + ec.message());
    port_ = acceptor_.local_endpoint().port();
    accept();
    thread_ = std::thread([this] { ioc_.run(); });
  }

  ~LiveGateway() { stop(); }
  LiveGateway(const LiveGateway&) = delete;
  LiveGateway& operator=(const LiveGateway&) = delete;

  void stop() {
    if (!thread_.joinable()) return;
    boost::asio::post(ioc_, [this] {
      boost::system::error_code ec;
      acceptor_.close(ec);
      for (const auto& s : sessions_) s->close();
      sessions_.clear();
    });
    work_.reset();
    thread_.join();
  }

  std::uint16_t port() const { return port_; }

  /// Thread-safe. Queues a snapshot message for every connected client.
  void broadcast(std::string message) {
    boost::asio::post(ioc_, [this, m = std::move(message)] {
      latest_ = m;
      for (const auto& s : sessions_) s->push_snapshot(m);
    });
  }

  std::size_t client_count() {
    if (!thread_.joinable()) return 0;
    std::promise<std::size_t> p;
    auto f = p.get_future();
    boost::asio::post(ioc_, [&] { p.set_value(sessions_.size()); });
    return f.get();
  }

 private:
  class Session : public std::enable_shared_from_this<Session> {
   public:
    Session(LiveGateway& gw, boost::asio::ip::tcp::socket socket) : gw_(gw), ws_(std::move(socket)) {}

    void start() {
      ws_.text(true);
      ws_.async_accept([self = shared_from_this()](boost::beast::error_code ec) {
        if (ec) return;
        self->gw_.sessions_.insert(self);
        if (!self->gw_.latest_.empty()) self->push_snapshot(self->gw_.latest_);
        self->read();
      });
    }

    void push_snapshot(const std::string& m) {
      snapshot_ = m;
      write();
    }

    void push_control(std::string m) {
      control_.push_back(std::move(m));
      write();
    }

    void close() {
      boost::beast::error_code ec;
      boost::beast::get_lowest_layer(ws_).socket().close(ec);
    }

   private:
    void read() {
      ws_.async_read(buffer_, [self = shared_from_this()](boost::beast::error_code ec, std::size_t) {
        if (ec) {
          self->gw_.sessions_.erase(self);
          return;
        }
        const auto text = boost::beast::buffers_to_string(self->buffer_.data());
        self->buffer_.consume(self->buffer_.size());
        self->handle(text);
        self->read();
      });
    }

    void handle(const std::string& text) {
      try {
        const auto j = nlohmann::json::parse(text, nullptr, false);
        if (j.is_discarded()) throw Error(ErrorCode::ParseError, "message is not valid JSON");
        gw_.inject_(j);
      } catch (const Error& e) {
        push_control(nlohmann::json{{"type", "error"}, {"code", to_string(e.code())}, {"message", e.what()}}.dump());
      }
    }

    // Control replies go first; of the snapshots only the newest is kept.
    void write() {
      if (writing_) return;
      if (!control_.empty()) {
        out_ = std::move(control_.front());
        control_.pop_front();
      } else if (snapshot_) {
        out_ = std::move(*snapshot_);
        snapshot_.reset();
      } else {
        return;
      }
      writing_ = true;
      ws_.async_write(boost::asio::buffer(out_), [self = shared_from_this()](boost::beast::error_code ec, std::size_t) {
        self->writing_ = false;
        if (ec) {
          self->gw_.sessions_.erase(self);
          return;
        }
        self->write();
      });
    }

    LiveGateway& gw_;
    boost::beast::websocket::stream<boost::beast::tcp_stream> ws_;
    boost::beast::flat_buffer buffer_;
    std::deque<std::string> control_;
    std::optional<std::string> snapshot_;
    std::string out_;
    bool writing_ = false;
  };

  void accept() {
    acceptor_.async_accept([this](boost::system::error_code ec, boost::asio::ip::tcp::socket socket) {
      if (ec) return;
      std::make_shared<Session>(*this, std::move(socket))->start();
      accept();
    });
  }

  Inject inject_;
  boost::asio::io_context ioc_;
  boost::asio::executor_work_guard<boost::asio::io_context::executor_type> work_{ioc_.get_executor()};
  boost::asio::ip::tcp::acceptor acceptor_;
  std::set<std::shared_ptr<Session>> sessions_;
  std::string latest_;
  std::uint16_t port_ = 0;
  std::thread thread_;
};

}  // namespace xri::runner
