#include "http_client.hpp"

#include <httplib.h>

#include <algorithm>

#include "cec/error.hpp"

namespace cec::detail {

Endpoint Endpoint::parse(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) {
    throw Error(ErrorCode::InvalidArgument,
                "endpoint must start with http:// or https://: " + url);
  }
  const auto scheme = url.substr(0, scheme_end);
  if (scheme != "http" && scheme != "https") {
    throw Error(ErrorCode::InvalidArgument, "unsupported scheme: " + url);
  }
  const auto path_begin = url.find('/', scheme_end + 3);
  Endpoint ep;
  if (path_begin == std::string::npos) {
    ep.origin = url;
  } else {
    ep.origin = url.substr(0, path_begin);
    ep.prefix = url.substr(path_begin);
    while (!ep.prefix.empty() && ep.prefix.back() == '/') ep.prefix.pop_back();
  }
  return ep;
}

struct HttpClient::Impl {
  httplib::Client client;
  explicit Impl(const std::string& origin) : client(origin) {}
};

namespace {

HttpResponse convert(const httplib::Result& res) {
  HttpResponse out;
  if (!res) {
    out.transport_error = httplib::to_string(res.error());
    return out;
  }
  out.status = res->status;
  out.body = res->body;
  if (res->has_header("Retry-After")) {
    out.retry_after = res->get_header_value("Retry-After");
  }
  return out;
}

httplib::Headers to_httplib(const Headers& headers) {
  httplib::Headers out;
  for (const auto& [k, v] : headers) out.emplace(k, v);
  return out;
}

}  // namespace

HttpClient::HttpClient(const std::string& base_url,
                       std::chrono::milliseconds timeout)
    : endpoint_(Endpoint::parse(base_url)), impl_(std::make_unique<Impl>(endpoint_.origin)) {
  const auto secs = timeout.count() / 1000;
  const auto usecs = (timeout.count() % 1000) * 1000;
  impl_->client.set_connection_timeout(secs, usecs);
  impl_->client.set_read_timeout(secs, usecs);
  impl_->client.set_write_timeout(secs, usecs);
  impl_->client.set_keep_alive(true);
}

HttpClient::~HttpClient() = default;

HttpResponse HttpClient::post_json(const std::string& path,
                                   const std::string& body,
                                   const Headers& headers) {
  return convert(impl_->client.Post(endpoint_.prefix + path,
                                    to_httplib(headers), body,
                                    "application/json"));
}

HttpResponse HttpClient::get(const std::string& path, const Headers& headers) {
  return convert(impl_->client.Get(endpoint_.prefix + path, to_httplib(headers)));
}

std::chrono::milliseconds backoff_delay(
    std::chrono::milliseconds initial, int attempt,
    const std::optional<std::string>& retry_after) {
  auto delay = initial * (1LL << std::min(attempt, 20));
  if (retry_after) {
    try {
      const auto secs = std::clamp(std::stoll(*retry_after), 0LL, 60LL);
      delay = std::max<std::chrono::milliseconds>(delay,
                                                  std::chrono::seconds(secs));
    } catch (const std::exception&) {
      // HTTP-date form is not honoured; keep the exponential delay.
    }
  }
  return delay;
}

}  // namespace cec::detail
