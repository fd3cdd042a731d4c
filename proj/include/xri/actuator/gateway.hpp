#pragma once

#include <condition_variable>
#include <deque>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

#include "xri/actuator/command.hpp"
#include "xri/actuator/hue_http.hpp"
#include "xri/core/error.hpp"

namespace xri::actuator {

struct SendReport {
  ActuatorCommand cmd;
  int attempts = 0;
  SendResult result;
  bool dropped = false;  // all attempts failed
};

/// Outbound command queue with one sender. Each command gets one attempt plus
/// up to max_retries retries, then is dropped. Either drain it synchronously
/// with flush() or start() a worker thread.
class ActuatorGateway {
 public:
  using Sender = std::function<SendResult(const ActuatorCommand&)>;

  explicit ActuatorGateway(Sender sender, int max_retries = 2) : sender_(std::move(sender)), max_retries_(max_retries) {
    if (!sender_) throw Error(ErrorCode::InvalidArgument, "gateway needs a sender");
    if (max_retries_ < 0) throw Error(ErrorCode::InvalidArgument, "max_retries must be >= 0");
  }

  ~ActuatorGateway() { stop(); }
  ActuatorGateway(const ActuatorGateway&) = delete;
  ActuatorGateway& operator=(const ActuatorGateway&) = delete;

  void enqueue(ActuatorCommand cmd) {
    if (!cmd.valid()) throw Error(ErrorCode::InvalidArgument, "invalid actuator command for light '" + cmd.light_id + "'");
    {
      std::lock_guard lock(mu_);
      queue_.push_back(std::move(cmd));
    }
    cv_.notify_all();
  }

  /// Sends everything queued, in order, on the calling thread.
  void flush() {
    for (;;) {
      ActuatorCommand cmd;
      {
        std::lock_guard lock(mu_);
        if (queue_.empty()) return;
        cmd = std::move(queue_.front());
        queue_.pop_front();
        ++in_flight_;
      }
      deliver(cmd);
    }
  }

  void start() {
    std::lock_guard lock(mu_);
    if (worker_.joinable()) return;
    stopping_ = false;
    worker_ = std::thread([this] { run(); });
  }

  /// Stops the worker after it has sent what is already queued.
  void stop() {
    {
      std::lock_guard lock(mu_);
      if (!worker_.joinable()) return;
      stopping_ = true;
    }
    cv_.notify_all();
    worker_.join();
  }

  void wait_idle() {
    std::unique_lock lock(mu_);
    idle_cv_.wait(lock, [this] { return queue_.empty() && in_flight_ == 0; });
  }

  std::vector<SendReport> take_reports() {
    std::lock_guard lock(mu_);
    std::vector<SendReport> out;
    out.swap(reports_);
    return out;
  }

  std::size_t pending() const {
    std::lock_guard lock(mu_);
    return queue_.size() + in_flight_;
  }

  int max_retries() const { return max_retries_; }

 private:
  void run() {
    std::unique_lock lock(mu_);
    for (;;) {
      cv_.wait(lock, [this] { return stopping_ || !queue_.empty(); });
      if (queue_.empty()) return;
      auto cmd = std::move(queue_.front());
      queue_.pop_front();
      ++in_flight_;
      lock.unlock();
      deliver(cmd);
      lock.lock();
    }
  }

  void deliver(const ActuatorCommand& cmd) {
    SendReport rep{cmd, 0, {}, false};
    for (int attempt = 0; attempt <= max_retries_; ++attempt) {
      ++rep.attempts;
      try {
        rep.result = sender_(cmd);
      } catch (const std::exception& e) {
        rep.result = {SendOutcome::HttpError, 0, e.what()};
      }
      if (rep.result.outcome == SendOutcome::Ok) break;
    }
    rep.dropped = rep.result.outcome != SendOutcome::Ok;
    {
      std::lock_guard lock(mu_);
      reports_.push_back(std::move(rep));
      --in_flight_;
    }
    idle_cv_.notify_all();
  }

  Sender sender_;
  int max_retries_;
  mutable std::mutex mu_;
  std::condition_variable cv_;
  std::condition_variable idle_cv_;
  std::deque<ActuatorCommand> queue_;
  std::vector<SendReport> reports_;
  std::size_t in_flight_ = 0;
  bool stopping_ = false;
  std::thread worker_;
};

}  // namespace xri::actuator
