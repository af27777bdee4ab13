#pragma once

#include <httplib.h>
#include <json.hpp>

#include <atomic>
#include <chrono>
#include <deque>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace testing {

/// In-process HTTP server on an ephemeral localhost port. Register handlers
/// through server() before calling start().
class MockServer {
 public:
  MockServer() = default;
  MockServer(const MockServer&) = delete;
  MockServer& operator=(const MockServer&) = delete;
  ~MockServer() { stop(); }

  httplib::Server& server() { return server_; }

  void start() {
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }

  void stop() {
    if (thread_.joinable()) {
      server_.stop();
      thread_.join();
    }
  }

  std::string url() const { return "http://127.0.0.1:" + std::to_string(port_); }

 private:
  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
};

struct ScriptedReply {
  ScriptedReply(int code = 200, std::string body = {}, std::string retry = {})
      : status(code), content(std::move(body)), retry_after(std::move(retry)) {}

  int status;
  std::string content;       // body {"content": ...} on 200
  std::string retry_after;   // header value when nonempty
};

/// Chat endpoint replaying a fixed status sequence, then answering 200 with
/// `fallback` once the script runs out. Records every request.
class ScriptedChat {
 public:
  explicit ScriptedChat(std::vector<ScriptedReply> script,
                        std::string fallback = "Generated explanation.")
      : script_(script.begin(), script.end()), fallback_(std::move(fallback)) {
    mock_.server().Post("/chat", [this](const httplib::Request& req,
                                        httplib::Response& res) {
      ScriptedReply reply{200, fallback_, {}};
      {
        std::lock_guard lock(mu_);
        bodies_.push_back(req.body);
        auth_.push_back(req.get_header_value("Authorization"));
        if (!script_.empty()) {
          reply = script_.front();
          script_.pop_front();
        }
      }
      res.status = reply.status;
      if (!reply.retry_after.empty()) res.set_header("Retry-After", reply.retry_after);
      if (reply.status == 200) {
        const std::string content = reply.content.empty() ? fallback_ : reply.content;
        res.set_content(nlohmann::json{{"content", content}}.dump(), "application/json");
      } else {
        res.set_content(R"({"error":"scripted"})", "application/json");
      }
    });
    mock_.start();
  }
  ~ScriptedChat() { mock_.stop(); }

  std::string url() const { return mock_.url(); }

  std::size_t calls() const {
    std::lock_guard lock(mu_);
    return bodies_.size();
  }
  std::vector<std::string> bodies() const {
    std::lock_guard lock(mu_);
    return bodies_;
  }
  std::vector<std::string> auth_headers() const {
    std::lock_guard lock(mu_);
    return auth_;
  }

 private:
  MockServer mock_;
  mutable std::mutex mu_;
  std::deque<ScriptedReply> script_;
  std::string fallback_;
  std::vector<std::string> bodies_;
  std::vector<std::string> auth_;
};

}  // namespace testing
