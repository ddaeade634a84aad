#pragma once

// Local chat-completion endpoint that records every request it receives.

#include <atomic>
#include <chrono>
#include <functional>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include <httplib.h>
#include <json.hpp>

namespace testutil {

class MockChatServer {
 public:
  struct Reply {
    int status = 200;
    std::string body;
    std::chrono::milliseconds delay{0};
  };
  struct Captured {
    std::string body;
    std::string authorization;
    std::chrono::steady_clock::time_point arrived;
  };
  using Responder = std::function<Reply(std::size_t index, const std::string& body)>;

  static std::string completion(const std::string& content) {
    nlohmann::json doc = {{"choices", {{{"index", 0}, {"message", {{"role", "assistant"}, {"content", content}}}}}}};
    return doc.dump();
  }

  explicit MockChatServer(Responder responder) : responder_(std::move(responder)) {
    server_.Post("/v1/chat/completions", [this](const httplib::Request& req, httplib::Response& res) {
      const int now = ++in_flight_;
      int seen = max_in_flight_.load();
      while (now > seen && !max_in_flight_.compare_exchange_weak(seen, now)) {
      }
      std::size_t index;
      {
        std::lock_guard lock(mutex_);
        index = captured_.size();
        captured_.push_back({req.body, req.get_header_value("Authorization"), std::chrono::steady_clock::now()});
      }
      Reply reply = responder_(index, req.body);
      if (reply.delay.count() > 0) std::this_thread::sleep_for(reply.delay);
      res.status = reply.status;
      res.set_content(reply.body, "application/json");
      --in_flight_;
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }

  ~MockChatServer() {
    server_.stop();
    if (thread_.joinable()) thread_.join();
  }

  std::string url() const { return "http://127.0.0.1:" + std::to_string(port_) + "/v1/chat/completions"; }

  std::vector<Captured> requests() const {
    std::lock_guard lock(mutex_);
    return captured_;
  }

  int max_in_flight() const { return max_in_flight_.load(); }

 private:
  Responder responder_;
  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
  mutable std::mutex mutex_;
  std::vector<Captured> captured_;
  std::atomic<int> in_flight_{0};
  std::atomic<int> max_in_flight_{0};
};

}  // namespace testutil
