#include "cec/teacher.hpp"

#include <atomic>
#include <cstdlib>
#include <fstream>
#include <thread>

#include <json.hpp>

#include "cec/error.hpp"
#include "cec/fileio.hpp"
#include "cec/hash.hpp"
#include "cec/parallel.hpp"
#include "http_client.hpp"

namespace cec {

namespace {

using nlohmann::json;

constexpr std::string_view kClaim = "{claim}";
constexpr std::string_view kEvidence = "{evidence}";
constexpr std::string_view kLabel = "{label}";

std::size_t count_occurrences(std::string_view hay, std::string_view needle) {
  std::size_t count = 0;
  for (auto pos = hay.find(needle); pos != std::string_view::npos;
       pos = hay.find(needle, pos + needle.size())) {
    ++count;
  }
  return count;
}

std::string numbered(const std::vector<std::string>& items) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i > 0) out += '\n';
    out += std::to_string(i + 1);
    out += ". ";
    out += items[i];
  }
  return out;
}

// Spaces request starts at least 60/rpm seconds apart.
class RateLimiter {
 public:
  explicit RateLimiter(double rpm)
      : interval_(rpm > 0.0 ? std::chrono::duration_cast<Clock::duration>(
                                  std::chrono::duration<double>(60.0 / rpm))
                            : Clock::duration::zero()) {}

  void acquire() {
    if (interval_ == Clock::duration::zero()) return;
    Clock::time_point slot;
    {
      std::lock_guard lock(mu_);
      slot = std::max(Clock::now(), next_);
      next_ = slot + interval_;
    }
    std::this_thread::sleep_until(slot);
  }

 private:
  using Clock = std::chrono::steady_clock;
  Clock::duration interval_;
  std::mutex mu_;
  Clock::time_point next_{};
};

enum class Status { Skipped, Cached, Generated, Failed, NotAttempted };

struct Slot {
  Status status = Status::Skipped;
  std::string content;
  std::size_t calls = 0;
  GenerationFailure failure;
};

void send_with_retries(detail::HttpClient& client, const std::string& body,
                       const detail::Headers& headers, const TeacherConfig& cfg,
                       RateLimiter& limiter, Slot& slot,
                       const std::string& instance_id) {
  auto fail = [&](std::string code, std::string message) {
    slot.status = Status::Failed;
    slot.failure = {instance_id, std::move(code), std::move(message),
                    static_cast<int>(slot.calls)};
  };
  for (int attempt = 0;; ++attempt) {
    limiter.acquire();
    ++slot.calls;
    const auto res = client.post_json("/chat", body, headers);
    if (res.status == 200) {
      try {
        auto j = json::parse(res.body);
        slot.content = j.at("content").get<std::string>();
      } catch (const json::exception&) {
        fail("EndpointError", "response lacks a string 'content' field");
        return;
      }
      slot.status = Status::Generated;
      return;
    }
    if (res.status == 401 || res.status == 403) {
      fail("AuthFailure",
           "HTTP " + std::to_string(res.status) + " from teacher endpoint");
      return;
    }
    if (!res.retryable()) {
      fail("EndpointError", "HTTP " + std::to_string(res.status));
      return;
    }
    if (attempt >= cfg.max_retries) {
      if (res.status == 429) {
        fail("RateLimited", "still rate limited after " +
                                std::to_string(cfg.max_retries) + " retries");
      } else {
        fail("EndpointError",
             (res.transport_failed() ? res.transport_error
                                     : "HTTP " + std::to_string(res.status)) +
                 " after " + std::to_string(cfg.max_retries) + " retries");
      }
      return;
    }
    std::this_thread::sleep_for(
        detail::backoff_delay(cfg.initial_backoff, attempt, res.retry_after));
  }
}

}  // namespace

PromptTemplate PromptTemplate::builtin() {
  return {
      "You explain fact-checking verdicts. Given a claim, evidence sentences "
      "and a verdict label, write a short explanation of the cause-and-effect "
      "reasoning that connects the evidence to the verdict.",
      "Claim: {claim}\n"
      "Evidence:\n{evidence}\n"
      "Verdict: {label}\n\n"
      "Explain in a few sentences how the evidence causally supports, "
      "refutes, or fails to settle the claim."};
}

PromptTemplate PromptTemplate::load(const std::filesystem::path& path) {
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::InvalidArgument,
                "template " + path.string() + " is not JSON: " + e.what());
  }
  if (!j.is_object() || !j.contains("user") || !j["user"].is_string()) {
    throw Error(ErrorCode::InvalidArgument,
                "template " + path.string() + " needs a string field 'user'");
  }
  PromptTemplate tpl{j.value("system", std::string()), j["user"].get<std::string>()};
  tpl.validate();
  return tpl;
}

void PromptTemplate::validate() const {
  for (auto ph : {kClaim, kEvidence, kLabel}) {
    const auto n = count_occurrences(user_template, ph);
    if (n != 1) {
      throw Error(ErrorCode::MissingPlaceholder,
                  "user template must contain " + std::string(ph) +
                      " exactly once (found " + std::to_string(n) + ")");
    }
  }
}

std::string render_prompt(const PromptTemplate& tpl, const Instance& inst) {
  tpl.validate();
  const std::string_view src = tpl.user_template;
  std::string out;
  out.reserve(src.size() + inst.claim.size() + 64);
  for (std::size_t i = 0; i < src.size();) {
    if (src[i] == '{') {
      const auto rest = src.substr(i);
      if (rest.starts_with(kClaim)) {
        out += inst.claim;
        i += kClaim.size();
        continue;
      }
      if (rest.starts_with(kEvidence)) {
        out += numbered(inst.evidence);
        i += kEvidence.size();
        continue;
      }
      if (rest.starts_with(kLabel)) {
        out += to_string(inst.label);
        i += kLabel.size();
        continue;
      }
    }
    out += src[i++];
  }
  return out;
}

std::string chat_request_body(const GenerationRequest& req) {
  nlohmann::ordered_json body;
  body["model"] = req.model_name;
  body["messages"] = nlohmann::ordered_json::array(
      {{{"role", "system"}, {"content", req.system_text}},
       {{"role", "user"}, {"content", req.rendered_prompt}}});
  body["temperature"] = req.temperature;
  body["max_tokens"] = req.max_tokens;
  return body.dump();
}

std::uint64_t request_hash(const GenerationRequest& req) {
  auto h = fnv1a64(req.system_text);
  h = fnv1a64("\x1f", h);
  h = fnv1a64(req.rendered_prompt, h);
  h = fnv1a64("\x1f", h);
  return fnv1a64(req.model_name, h);
}

void TeacherConfig::load_api_key_from_environment() {
  if (const char* key = std::getenv("TEACHER_API_KEY"); key && *key) {
    api_key = key;
  }
}

ResponseCache::ResponseCache(std::filesystem::path path) : path_(std::move(path)) {
  std::ifstream in(*path_, std::ios::binary);
  if (!in) return;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      auto j = json::parse(line);
      const auto hash = j.at("hash").get<std::string>();
      const auto model = j.at("model").get<std::string>();
      entries_.insert_or_assign(hash + '\x1f' + model,
                                j.at("content").get<std::string>());
    } catch (const json::exception&) {
      throw Error(ErrorCode::CacheCorrupt, path_->string() + ":" +
                                               std::to_string(line_no) +
                                               ": unreadable response entry");
    }
  }
}

std::optional<std::string> ResponseCache::get(std::uint64_t hash,
                                              std::string_view model) const {
  std::lock_guard lock(mu_);
  auto it = entries_.find(hex16(hash) + '\x1f' + std::string(model));
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

void ResponseCache::put(std::uint64_t hash, std::string_view model,
                        std::string_view content) {
  std::lock_guard lock(mu_);
  auto [it, inserted] = entries_.try_emplace(
      hex16(hash) + '\x1f' + std::string(model), std::string(content));
  if (!inserted || !path_) return;
  nlohmann::ordered_json rec;
  rec["hash"] = hex16(hash);
  rec["model"] = model;
  rec["content"] = content;
  std::ofstream out(*path_, std::ios::binary | std::ios::app);
  if (!out) throw Error(ErrorCode::Io, "cannot append to " + path_->string());
  out << rec.dump() << '\n';
}

std::size_t ResponseCache::size() const {
  std::lock_guard lock(mu_);
  return entries_.size();
}

GenerationOutcome generate_explanations(const Corpus& corpus,
                                        const PromptTemplate& tpl,
                                        const TeacherConfig& cfg) {
  tpl.validate();
  if (cfg.endpoint.empty()) {
    throw Error(ErrorCode::InvalidArgument, "teacher endpoint is required");
  }
  detail::Endpoint::parse(cfg.endpoint);

  ResponseCache cache = cfg.cache_path ? ResponseCache(*cfg.cache_path)
                                       : ResponseCache();
  RateLimiter limiter(cfg.requests_per_minute);
  std::atomic<bool> aborted{false};

  detail::Headers headers;
  if (cfg.api_key) headers.emplace_back("Authorization", "Bearer " + *cfg.api_key);

  std::vector<std::size_t> pending;
  for (std::size_t i = 0; i < corpus.instances.size(); ++i) {
    if (!corpus.instances[i].reference_explanation) pending.push_back(i);
  }
  std::vector<Slot> slots(pending.size());

  // Clients are not thread-safe; each in-flight request checks one out.
  std::mutex pool_mu;
  std::vector<std::unique_ptr<detail::HttpClient>> pool;
  auto checkout = [&] {
    std::lock_guard lock(pool_mu);
    if (pool.empty()) {
      return std::make_unique<detail::HttpClient>(cfg.endpoint, cfg.timeout);
    }
    auto c = std::move(pool.back());
    pool.pop_back();
    return c;
  };
  auto checkin = [&](std::unique_ptr<detail::HttpClient> c) {
    std::lock_guard lock(pool_mu);
    pool.push_back(std::move(c));
  };

  parallel_for(pending.size(), cfg.max_concurrency, [&](std::size_t k) {
    const Instance& inst = corpus.instances[pending[k]];
    Slot& slot = slots[k];
    GenerationRequest req{inst.id, tpl.system_text, render_prompt(tpl, inst),
                          cfg.model, cfg.temperature, cfg.max_tokens};
    const auto hash = request_hash(req);
    if (auto hit = cache.get(hash, cfg.model)) {
      slot.status = Status::Cached;
      slot.content = std::move(*hit);
      return;
    }
    if (aborted) {
      slot.status = Status::NotAttempted;
      return;
    }
    auto client = checkout();
    send_with_retries(*client, chat_request_body(req), headers, cfg, limiter,
                      slot, inst.id);
    checkin(std::move(client));
    if (slot.status == Status::Generated) {
      cache.put(hash, cfg.model, slot.content);
    } else if (slot.failure.code == "AuthFailure") {
      aborted = true;
    }
  });

  GenerationOutcome out{corpus, {}};
  auto& rep = out.report;
  rep.skipped = corpus.instances.size() - pending.size();
  for (std::size_t k = 0; k < pending.size(); ++k) {
    auto& slot = slots[k];
    rep.network_calls += slot.calls;
    if (slot.calls > 1) rep.retries += slot.calls - 1;
    switch (slot.status) {
      case Status::Cached:
        ++rep.from_cache;
        out.corpus.instances[pending[k]].reference_explanation = std::move(slot.content);
        break;
      case Status::Generated:
        ++rep.generated;
        out.corpus.instances[pending[k]].reference_explanation = std::move(slot.content);
        break;
      case Status::Failed:
        ++rep.failed;
        rep.failures.push_back(std::move(slot.failure));
        break;
      case Status::NotAttempted:
        ++rep.not_attempted;
        break;
      case Status::Skipped:
        break;
    }
  }
  rep.aborted = aborted;
  return out;
}

}  // namespace cec
