#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "cec/corpus.hpp"

namespace cec {

/// System message plus a user message containing each of {claim},
/// {evidence} and {label} exactly once.
struct PromptTemplate {
  std::string system_text;
  std::string user_template;

  /// The template shipped with the toolkit (original wording).
  static PromptTemplate builtin();
  /// JSON file: {"system": "...", "user": "..."}.
  static PromptTemplate load(const std::filesystem::path& path);

  /// Throws Error(MissingPlaceholder) unless every placeholder occurs once.
  void validate() const;
};

/// Substitutes the claim verbatim, the evidence as a numbered list
/// ("1. E1\n2. E2") and the canonical lowercase label. Substituted text is
/// never rescanned for placeholders.
std::string render_prompt(const PromptTemplate& tpl, const Instance& inst);

struct GenerationRequest {
  std::string instance_id;
  std::string system_text;
  std::string rendered_prompt;
  std::string model_name;
  double temperature = 0.0;
  std::size_t max_tokens = 512;
};

/// Wire body for POST {endpoint}/chat.
std::string chat_request_body(const GenerationRequest& req);

/// Cache key: FNV-1a over system text, rendered prompt and model name.
std::uint64_t request_hash(const GenerationRequest& req);

struct TeacherConfig {
  std::string endpoint;
  std::string model = "teacher";
  double temperature = 0.0;
  std::size_t max_tokens = 512;
  /// Bearer token; read from TEACHER_API_KEY by from_environment().
  std::optional<std::string> api_key;
  /// 0 disables rate limiting.
  double requests_per_minute = 60.0;
  std::size_t max_concurrency = 2;
  int max_retries = 3;
  std::chrono::milliseconds initial_backoff{500};
  std::chrono::milliseconds timeout{60000};
  std::optional<std::filesystem::path> cache_path;

  /// Fills api_key from the TEACHER_API_KEY environment variable.
  void load_api_key_from_environment();
};

/// Response cache, JSONL {"hash":"<hex16>","model":"...","content":"..."}.
class ResponseCache {
 public:
  ResponseCache() = default;
  explicit ResponseCache(std::filesystem::path path);

  std::optional<std::string> get(std::uint64_t hash, std::string_view model) const;
  void put(std::uint64_t hash, std::string_view model, std::string_view content);
  std::size_t size() const;

 private:
  std::optional<std::filesystem::path> path_;
  mutable std::mutex mu_;
  std::unordered_map<std::string, std::string> entries_;
};

struct GenerationFailure {
  std::string instance_id;
  std::string code;  // AuthFailure, RateLimited, EndpointError
  std::string message;
  int attempts = 0;

  bool operator==(const GenerationFailure&) const = default;
};

struct GenerationReport {
  std::size_t generated = 0;      // filled from a live response
  std::size_t from_cache = 0;     // filled from the response cache
  std::size_t skipped = 0;        // already had a reference
  std::size_t failed = 0;
  std::size_t not_attempted = 0;  // left untouched after an abort
  std::size_t network_calls = 0;  // HTTP requests, including retries
  std::size_t retries = 0;
  bool aborted = false;           // stopped on an authentication failure
  std::vector<GenerationFailure> failures;
};

struct GenerationOutcome {
  Corpus corpus;
  GenerationReport report;
};

/// Fills reference_explanation for every instance lacking one; never
/// overwrites an existing reference. Retries 429, 5xx and transport errors
/// with exponential backoff; 401/403 fail immediately and stop further
/// requests. Failed instances stay unfilled and are listed in the report.
GenerationOutcome generate_explanations(const Corpus& corpus,
                                        const PromptTemplate& tpl,
                                        const TeacherConfig& cfg);

}  // namespace cec
