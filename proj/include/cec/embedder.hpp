#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace cec {

/// One embedding. Providers L2-normalize, so `norm` is either 0 (all
/// components zero) or within 1e-6 of 1.
struct EmbeddingVector {
  std::vector<double> components;
  double norm = 0.0;

  EmbeddingVector() = default;
  explicit EmbeddingVector(std::vector<double> c);

  std::size_t dimension() const noexcept { return components.size(); }
  bool is_zero() const noexcept { return norm == 0.0; }
  bool operator==(const EmbeddingVector&) const = default;
};

/// Scales to unit norm in place; leaves zero vectors untouched.
void normalize(EmbeddingVector& v);

struct EmbeddingMatrix {
  std::vector<EmbeddingVector> rows;  // row i embeds input text i
  std::string provider_id;
  std::uint64_t content_hash = 0;
  std::size_t dimension = 0;

  std::size_t size() const noexcept { return rows.size(); }
};

/// FNV-1a over the input texts, each followed by a 0xFF separator byte
/// (which never occurs in UTF-8).
std::uint64_t content_hash(std::span<const std::string> texts);

/// u.v / (|u||v|), clamped to [-1, 1]; 0.0 when either vector is zero.
/// Throws DimensionMismatch on unequal lengths.
double cosine(const EmbeddingVector& u, const EmbeddingVector& v);

enum class ProviderKind { HashedBow, Precomputed, Remote };

std::string_view to_string(ProviderKind kind) noexcept;
std::optional<ProviderKind> parse_provider_kind(std::string_view text);

inline constexpr std::size_t kDefaultHashedDimension = 256;

struct ProviderConfig {
  ProviderKind kind = ProviderKind::HashedBow;
  /// Required for HASHED_BOW (defaulted to 256); optional expected dimension
  /// for the other kinds.
  std::optional<std::size_t> dimension;
  std::optional<std::string> endpoint;
  std::optional<std::string> model_name;
  /// PRECOMPUTED: the vector file (required, read-only). Otherwise: optional
  /// persistent cache, appended as new texts are embedded.
  std::optional<std::filesystem::path> cache_path;

  // Remote transport.
  std::size_t max_in_flight = 4;
  std::size_t max_batch = 64;
  int max_retries = 3;
  std::chrono::milliseconds initial_backoff{500};
  std::chrono::milliseconds timeout{30000};

  static ProviderConfig hashed_bow(std::size_t dim = kDefaultHashedDimension);
  static ProviderConfig precomputed(std::filesystem::path file,
                                    std::optional<std::string> model = {});
  static ProviderConfig remote(std::string endpoint,
                               std::optional<std::string> model = {});

  /// Throws InvalidArgument if a kind's required field is missing.
  void validate() const;
  /// Stable identifier: "hashed-bow:<d>", "precomputed:<model|*>",
  /// "remote:<model|default>@<endpoint>".
  std::string provider_id() const;
};

/// Count vector of FNV-1a(token) mod d over `tokenize(text)`, L2-normalized.
EmbeddingVector hashed_bow_embed(std::string_view text, std::size_t dimension);

/// Thread-safe content-addressed store keyed by (provider id, FNV-1a(text)).
/// Entries also record the text length, which must match on lookup. When a
/// backing file is given, existing entries are read on construction and new
/// entries are appended as JSONL:
///   {"provider":"...","hash":"<hex16>","text_len":N,"vector":[...]}
class EmbeddingCache {
 public:
  EmbeddingCache() = default;
  /// Loads `path` if it exists. Throws CacheCorrupt on an unreadable entry.
  explicit EmbeddingCache(std::filesystem::path path, bool writable = true);

  std::optional<EmbeddingVector> get(std::string_view provider,
                                     std::string_view text) const;
  /// Lookup by hash only, ignoring provider (precomputed files without a
  /// requested model name).
  std::optional<EmbeddingVector> get_any_provider(std::string_view text) const;
  void put(std::string_view provider, std::string_view text,
           const EmbeddingVector& v);

  std::size_t size() const;

 private:
  struct Entry {
    std::size_t text_len;
    EmbeddingVector vector;
  };
  static std::string key(std::string_view provider, std::uint64_t hash);

  std::optional<std::filesystem::path> path_;
  bool writable_ = false;
  mutable std::shared_mutex mu_;
  std::unordered_map<std::string, Entry> entries_;
  std::unordered_map<std::uint64_t, Entry> by_hash_;
};

struct RemoteHealth {
  std::string status;
  std::string model;
  std::size_t dim = 0;
};

/// Embedding function behind one provider: deterministic hashed bag of
/// words, vectors exported by an external model, or a remote service.
class Embedder {
 public:
  explicit Embedder(ProviderConfig cfg);
  ~Embedder();
  Embedder(const Embedder&) = delete;
  Embedder& operator=(const Embedder&) = delete;

  /// One row per input text, order preserved; every row unit-norm or zero.
  /// Throws ProviderUnavailable, DimensionMismatch, MissingEmbedding.
  EmbeddingMatrix embed_batch(std::span<const std::string> texts);

  /// GET {endpoint}/health. REMOTE only.
  RemoteHealth health();

  const ProviderConfig& config() const noexcept { return cfg_; }
  const std::string& provider_id() const noexcept { return provider_id_; }
  /// Number of texts embedded by the backend rather than served from cache.
  std::size_t backend_calls() const noexcept;
  /// Number of HTTP requests sent (REMOTE only), including retries.
  std::size_t remote_requests() const noexcept;

 private:
  class RemoteClient;

  std::vector<EmbeddingVector> embed_remote(std::span<const std::string> texts);
  void check_dimension(std::size_t dim);

  ProviderConfig cfg_;
  std::string provider_id_;
  EmbeddingCache cache_;
  std::unique_ptr<RemoteClient> remote_;
  std::mutex dim_mu_;
  std::optional<std::size_t> dim_;
  std::size_t backend_calls_ = 0;
  mutable std::mutex stats_mu_;
};

/// Convenience wrapper constructing a transient Embedder.
EmbeddingMatrix embed_batch(const ProviderConfig& cfg,
                            std::span<const std::string> texts);

}  // namespace cec
