#pragma once

#include <chrono>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace cec::detail {

struct HttpResponse {
  int status = 0;  // 0 when the request never produced a response
  std::string body;
  std::optional<std::string> retry_after;
  std::string transport_error;

  bool transport_failed() const noexcept { return status == 0; }
  bool retryable() const noexcept {
    return status == 0 || status == 429 || status >= 500;
  }
};

/// Base URL split into the scheme://host:port origin and a path prefix.
struct Endpoint {
  std::string origin;
  std::string prefix;  // no trailing '/'

  static Endpoint parse(const std::string& url);
};

using Headers = std::vector<std::pair<std::string, std::string>>;

/// Blocking HTTP client bound to one endpoint. Not thread-safe; use one per
/// worker.
class HttpClient {
 public:
  HttpClient(const std::string& base_url, std::chrono::milliseconds timeout);
  ~HttpClient();
  HttpClient(const HttpClient&) = delete;
  HttpClient& operator=(const HttpClient&) = delete;

  HttpResponse post_json(const std::string& path, const std::string& body,
                         const Headers& headers = {});
  HttpResponse get(const std::string& path, const Headers& headers = {});

 private:
  struct Impl;
  Endpoint endpoint_;
  std::unique_ptr<Impl> impl_;
};

/// Delay before retry `attempt` (0-based): initial * 2^attempt, raised to a
/// server-provided Retry-After (seconds, capped at 60) when present.
std::chrono::milliseconds backoff_delay(std::chrono::milliseconds initial,
                                        int attempt,
                                        const std::optional<std::string>& retry_after);

}  // namespace cec::detail
