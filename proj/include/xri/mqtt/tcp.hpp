#pragma once

// POSIX TCP transport for the embedded broker and its clients.

#include <arpa/inet.h>
#include <fcntl.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <atomic>
#include <cerrno>
#include <cstring>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "xri/core/error.hpp"
#include "xri/mqtt/client.hpp"
#include "xri/mqtt/codec.hpp"
#include "xri/mqtt/hub.hpp"

namespace xri::mqtt {

namespace detail {

class Fd {
 public:
  Fd() = default;
  explicit Fd(int fd) : fd_(fd) {}
  ~Fd() { reset(); }
  Fd(Fd&& o) noexcept : fd_(std::exchange(o.fd_, -1)) {}
  Fd& operator=(Fd&& o) noexcept {
    if (this != &o) {
      reset();
      fd_ = std::exchange(o.fd_, -1);
    }
    return *this;
  }
  Fd(const Fd&) = delete;
  Fd& operator=(const Fd&) = delete;

  int get() const { return fd_; }
  explicit operator bool() const { return fd_ >= 0; }
  void reset() {
    if (fd_ >= 0) ::close(fd_);
    fd_ = -1;
  }

 private:
  int fd_ = -1;
};

inline void set_nonblocking(int fd) { ::fcntl(fd, F_SETFL, ::fcntl(fd, F_GETFL, 0) | O_NONBLOCK); }

// Moves complete frames from `buf` into `out`. Throws MALFORMED on a bad length prefix.
inline void extract_frames(Bytes& buf, std::vector<Bytes>& out) {
  std::size_t off = 0;
  while (off < buf.size()) {
    const auto len = frame_length(std::span(buf).subspan(off));
    if (!len || *len > buf.size() - off) break;
    out.emplace_back(buf.begin() + static_cast<std::ptrdiff_t>(off), buf.begin() + static_cast<std::ptrdiff_t>(off + *len));
    off += *len;
  }
  buf.erase(buf.begin(), buf.begin() + static_cast<std::ptrdiff_t>(off));
}

}  // namespace detail

/// Accepts MQTT connections on a TCP port and feeds them into a BrokerHub.
/// One background thread multiplexes every connection with poll().
class TcpBrokerServer {
 public:
  /// Port 0 picks a free port. Throws PORT_IN_USE when binding fails.
  TcpBrokerServer(BrokerHub& hub, std::uint16_t port, const std::string& bind_address = "0.0.0.0") : hub_(hub) {
    listener_ = detail::Fd(::socket(AF_INET, SOCK_STREAM, 0));
    if (!listener_) throw Error(ErrorCode::PortInUse, std::strerror(errno));
    int one = 1;
    ::setsockopt(listener_.get(), SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(port);
    ::inet_pton(AF_INET, bind_address.c_str(), &addr.sin_addr);
    if (::bind(listener_.get(), reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0 ||
        ::listen(listener_.get(), 16) != 0)
      throw Error(ErrorCode::PortInUse, "cannot listen on port " + std::to_string(port) + ": " + std::strerror(errno));
    socklen_t len = sizeof addr;
    ::getsockname(listener_.get(), reinterpret_cast<sockaddr*>(&addr), &len);
    port_ = ntohs(addr.sin_port);
    detail::set_nonblocking(listener_.get());

    int pipefd[2];
    if (::pipe(pipefd) != 0) throw Error(ErrorCode::PortInUse, "pipe failed");
    wake_read_ = detail::Fd(pipefd[0]);
    wake_write_ = detail::Fd(pipefd[1]);
    detail::set_nonblocking(wake_read_.get());
    detail::set_nonblocking(wake_write_.get());

    thread_ = std::thread([this] { loop(); });
  }

  ~TcpBrokerServer() { stop(); }

  TcpBrokerServer(const TcpBrokerServer&) = delete;
  TcpBrokerServer& operator=(const TcpBrokerServer&) = delete;

  std::uint16_t port() const { return port_; }

  void stop() {
    if (stopping_.exchange(true)) return;
    wake();
    if (thread_.joinable()) thread_.join();
    for (auto& [key, conn] : conns_) hub_.detach(key);
    conns_.clear();
  }

  std::size_t connection_count() const {
    std::lock_guard lock(conns_mu_);
    return conns_.size();
  }

 private:
  struct Conn {
    detail::Fd fd;
    Bytes in;
    std::mutex out_mu;
    Bytes out;
    bool closing = false;
  };

  void wake() {
    const char b = 1;
    [[maybe_unused]] auto n = ::write(wake_write_.get(), &b, 1);
  }

  void loop() {
    while (!stopping_) {
      std::vector<pollfd> fds;
      std::vector<std::string> keys;
      fds.push_back({listener_.get(), POLLIN, 0});
      fds.push_back({wake_read_.get(), POLLIN, 0});
      {
        std::lock_guard lock(conns_mu_);
        for (auto& [key, conn] : conns_) {
          short events = POLLIN;
          {
            std::lock_guard out_lock(conn->out_mu);
            if (!conn->out.empty()) events |= POLLOUT;
          }
          fds.push_back({conn->fd.get(), events, 0});
          keys.push_back(key);
        }
      }
      if (::poll(fds.data(), fds.size(), 200) < 0 && errno != EINTR) break;
      if (stopping_) break;

      if (fds[1].revents & POLLIN) {
        char drain[64];
        while (::read(wake_read_.get(), drain, sizeof drain) > 0) {
        }
      }
      if (fds[0].revents & POLLIN) accept_all();

      for (std::size_t i = 0; i < keys.size(); ++i) service(keys[i], fds[i + 2].revents);
      reap();
    }
  }

  void accept_all() {
    for (;;) {
      const int fd = ::accept(listener_.get(), nullptr, nullptr);
      if (fd < 0) return;
      detail::set_nonblocking(fd);
      int one = 1;
      ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
      const auto key = "tcp-" + std::to_string(next_id_++);
      auto conn = std::make_shared<Conn>();
      conn->fd = detail::Fd(fd);
      {
        std::lock_guard lock(conns_mu_);
        conns_[key] = conn;
      }
      std::weak_ptr<Conn> weak = conn;
      hub_.attach(
          key,
          [this, weak](const Bytes& frame) {
            if (auto c = weak.lock()) {
              std::lock_guard out_lock(c->out_mu);
              c->out.insert(c->out.end(), frame.begin(), frame.end());
            }
            wake();
          },
          [this, weak](const std::string&) {
            if (auto c = weak.lock()) {
              std::lock_guard out_lock(c->out_mu);
              c->closing = true;
            }
            wake();
          });
    }
  }

  void service(const std::string& key, short revents) {
    std::shared_ptr<Conn> conn;
    {
      std::lock_guard lock(conns_mu_);
      auto it = conns_.find(key);
      if (it == conns_.end()) return;
      conn = it->second;
    }
    if (revents & (POLLIN | POLLHUP | POLLERR)) {
      std::uint8_t buf[4096];
      for (;;) {
        const auto n = ::recv(conn->fd.get(), buf, sizeof buf, 0);
        if (n > 0) {
          conn->in.insert(conn->in.end(), buf, buf + n);
          continue;
        }
        if (n == 0 || (errno != EAGAIN && errno != EWOULDBLOCK)) {
          std::lock_guard out_lock(conn->out_mu);
          conn->closing = true;
          conn->out.clear();
        }
        break;
      }
      std::vector<Bytes> frames;
      try {
        detail::extract_frames(conn->in, frames);
      } catch (const Error&) {
        std::lock_guard out_lock(conn->out_mu);
        conn->closing = true;
      }
      for (const auto& f : frames) hub_.submit(key, f);
    }
    flush(*conn);
  }

  static void flush(Conn& conn) {
    std::lock_guard out_lock(conn.out_mu);
    while (!conn.out.empty()) {
      const auto n = ::send(conn.fd.get(), conn.out.data(), conn.out.size(), MSG_NOSIGNAL);
      if (n <= 0) {
        if (n < 0 && (errno == EAGAIN || errno == EWOULDBLOCK)) return;
        conn.closing = true;
        conn.out.clear();
        return;
      }
      conn.out.erase(conn.out.begin(), conn.out.begin() + n);
    }
  }

  void reap() {
    std::vector<std::string> dead;
    {
      std::lock_guard lock(conns_mu_);
      for (auto& [key, conn] : conns_) {
        std::lock_guard out_lock(conn->out_mu);
        if (conn->closing && conn->out.empty()) dead.push_back(key);
      }
    }
    for (const auto& key : dead) {
      hub_.detach(key);
      std::lock_guard lock(conns_mu_);
      conns_.erase(key);
    }
  }

  BrokerHub& hub_;
  detail::Fd listener_;
  detail::Fd wake_read_;
  detail::Fd wake_write_;
  std::uint16_t port_ = 0;
  std::atomic<bool> stopping_{false};
  std::thread thread_;
  mutable std::mutex conns_mu_;
  std::map<std::string, std::shared_ptr<Conn>> conns_;
  std::uint64_t next_id_ = 0;
};

/// Client side of a TCP connection to any MQTT 3.1.1 broker.
class TcpTransport final : public Transport {
 public:
  TcpTransport(const std::string& host, std::uint16_t port) {
    addrinfo hints{};
    hints.ai_family = AF_INET;
    hints.ai_socktype = SOCK_STREAM;
    addrinfo* res = nullptr;
    if (::getaddrinfo(host.c_str(), std::to_string(port).c_str(), &hints, &res) != 0 || !res)
      throw Error(ErrorCode::ConnectionLost, "cannot resolve " + host);
    fd_ = detail::Fd(::socket(res->ai_family, res->ai_socktype, res->ai_protocol));
    const int rc = fd_ ? ::connect(fd_.get(), res->ai_addr, res->ai_addrlen) : -1;
    ::freeaddrinfo(res);
    if (rc != 0) throw Error(ErrorCode::ConnectionLost, "cannot connect to " + host + ":" + std::to_string(port));
    int one = 1;
    ::setsockopt(fd_.get(), IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
    detail::set_nonblocking(fd_.get());
  }

  void send(const Bytes& frame) override {
    if (!fd_) throw Error(ErrorCode::ConnectionLost, "socket closed");
    std::size_t off = 0;
    while (off < frame.size()) {
      const auto n = ::send(fd_.get(), frame.data() + off, frame.size() - off, MSG_NOSIGNAL);
      if (n > 0) {
        off += static_cast<std::size_t>(n);
      } else if (n < 0 && (errno == EAGAIN || errno == EWOULDBLOCK)) {
        pollfd p{fd_.get(), POLLOUT, 0};
        ::poll(&p, 1, 100);
      } else {
        fd_.reset();
        throw Error(ErrorCode::ConnectionLost, "send failed");
      }
    }
  }

  std::optional<Bytes> receive() override {
    if (frames_.empty() && fd_) {
      std::uint8_t buf[4096];
      for (;;) {
        const auto n = ::recv(fd_.get(), buf, sizeof buf, 0);
        if (n > 0) {
          in_.insert(in_.end(), buf, buf + n);
          continue;
        }
        if (n == 0 || (errno != EAGAIN && errno != EWOULDBLOCK)) fd_.reset();
        break;
      }
      std::vector<Bytes> frames;
      detail::extract_frames(in_, frames);
      for (auto& f : frames) frames_.push_back(std::move(f));
    }
    if (frames_.empty()) return std::nullopt;
    auto f = std::move(frames_.front());
    frames_.pop_front();
    return f;
  }

  bool is_open() const override { return static_cast<bool>(fd_); }
  void close() override { fd_.reset(); }

 private:
  detail::Fd fd_;
  Bytes in_;
  std::deque<Bytes> frames_;
};

}  // namespace xri::mqtt
