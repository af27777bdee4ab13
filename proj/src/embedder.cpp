#include "cec/embedder.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <semaphore>
#include <thread>
#include <unordered_set>

#include <json.hpp>

#include "cec/error.hpp"
#include "cec/hash.hpp"
#include "cec/textseg.hpp"
#include "http_client.hpp"

namespace cec {

using nlohmann::json;

EmbeddingVector::EmbeddingVector(std::vector<double> c)
    : components(std::move(c)) {
  double sq = 0.0;
  for (double x : components) sq += x * x;
  norm = std::sqrt(sq);
}

void normalize(EmbeddingVector& v) {
  if (v.norm == 0.0) return;
  for (double& x : v.components) x /= v.norm;
  double sq = 0.0;
  for (double x : v.components) sq += x * x;
  v.norm = std::sqrt(sq);
}

std::uint64_t content_hash(std::span<const std::string> texts) {
  std::uint64_t h = kFnvOffsetBasis;
  for (const auto& t : texts) {
    h = fnv1a64(t, h);
    h = fnv1a64("\xff", h);
  }
  return h;
}

double cosine(const EmbeddingVector& u, const EmbeddingVector& v) {
  if (u.dimension() != v.dimension()) {
    throw Error(ErrorCode::DimensionMismatch,
                "cosine of vectors with dimensions " +
                    std::to_string(u.dimension()) + " and " +
                    std::to_string(v.dimension()));
  }
  if (u.norm == 0.0 || v.norm == 0.0) return 0.0;
  double dot = 0.0;
  for (std::size_t k = 0; k < u.components.size(); ++k) {
    dot += u.components[k] * v.components[k];
  }
  double c = dot / (u.norm * v.norm);
  if (!std::isfinite(c)) {
    // Overflowed: rescale both vectors by their largest magnitude first.
    auto peak = [](const EmbeddingVector& x) {
      double p = 0.0;
      for (double e : x.components) p = std::max(p, std::fabs(e));
      return p;
    };
    const double su = peak(u), sv = peak(v);
    double d = 0.0, nu = 0.0, nv = 0.0;
    for (std::size_t k = 0; k < u.components.size(); ++k) {
      const double a = u.components[k] / su, b = v.components[k] / sv;
      d += a * b;
      nu += a * a;
      nv += b * b;
    }
    c = d / (std::sqrt(nu) * std::sqrt(nv));
  }
  return std::clamp(c, -1.0, 1.0);
}

std::string_view to_string(ProviderKind kind) noexcept {
  switch (kind) {
    case ProviderKind::HashedBow: return "hashed-bow";
    case ProviderKind::Precomputed: return "precomputed";
    case ProviderKind::Remote: return "remote";
  }
  return "hashed-bow";
}

std::optional<ProviderKind> parse_provider_kind(std::string_view text) {
  if (text == "hashed-bow") return ProviderKind::HashedBow;
  if (text == "precomputed") return ProviderKind::Precomputed;
  if (text == "remote") return ProviderKind::Remote;
  return std::nullopt;
}

ProviderConfig ProviderConfig::hashed_bow(std::size_t dim) {
  ProviderConfig cfg;
  cfg.kind = ProviderKind::HashedBow;
  cfg.dimension = dim;
  return cfg;
}

ProviderConfig ProviderConfig::precomputed(std::filesystem::path file,
                                           std::optional<std::string> model) {
  ProviderConfig cfg;
  cfg.kind = ProviderKind::Precomputed;
  cfg.cache_path = std::move(file);
  cfg.model_name = std::move(model);
  return cfg;
}

ProviderConfig ProviderConfig::remote(std::string endpoint,
                                      std::optional<std::string> model) {
  ProviderConfig cfg;
  cfg.kind = ProviderKind::Remote;
  cfg.endpoint = std::move(endpoint);
  cfg.model_name = std::move(model);
  return cfg;
}

void ProviderConfig::validate() const {
  if (dimension && *dimension == 0) {
    throw Error(ErrorCode::InvalidArgument, "dimension must be positive");
  }
  switch (kind) {
    case ProviderKind::HashedBow:
      if (!dimension) {
        throw Error(ErrorCode::InvalidArgument, "hashed-bow requires a dimension");
      }
      break;
    case ProviderKind::Precomputed:
      if (!cache_path) {
        throw Error(ErrorCode::InvalidArgument,
                    "precomputed provider requires a vector file");
      }
      break;
    case ProviderKind::Remote:
      if (!endpoint || endpoint->empty()) {
        throw Error(ErrorCode::InvalidArgument, "remote provider requires an endpoint");
      }
      if (max_in_flight == 0 || max_batch == 0) {
        throw Error(ErrorCode::InvalidArgument,
                    "remote provider needs positive in-flight and batch limits");
      }
      break;
  }
}

std::string ProviderConfig::provider_id() const {
  switch (kind) {
    case ProviderKind::HashedBow:
      return "hashed-bow:" +
             std::to_string(dimension.value_or(kDefaultHashedDimension));
    case ProviderKind::Precomputed:
      return "precomputed:" + model_name.value_or("*");
    case ProviderKind::Remote:
      return "remote:" + model_name.value_or("default") + "@" +
             endpoint.value_or("");
  }
  return {};
}

EmbeddingVector hashed_bow_embed(std::string_view text, std::size_t dimension) {
  std::vector<double> counts(dimension, 0.0);
  for (const auto& tok : tokenize(text).tokens) {
    counts[fnv1a64(tok) % dimension] += 1.0;
  }
  EmbeddingVector v(std::move(counts));
  normalize(v);
  return v;
}

// ---------------------------------------------------------------------------
// EmbeddingCache

EmbeddingCache::EmbeddingCache(std::filesystem::path path, bool writable)
    : path_(std::move(path)), writable_(writable) {
  std::ifstream in(*path_, std::ios::binary);
  if (!in) {
    if (!writable_) {
      throw Error(ErrorCode::Io, "cannot open vector file " + path_->string());
    }
    return;
  }
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    auto corrupt = [&](const std::string& why) {
      return Error(ErrorCode::CacheCorrupt, path_->string() + ":" +
                                                std::to_string(line_no) + ": " +
                                                why);
    };
    json rec;
    try {
      rec = json::parse(line);
    } catch (const json::parse_error&) {
      throw corrupt("invalid JSON");
    }
    if (!rec.is_object() || !rec.contains("provider") ||
        !rec["provider"].is_string() || !rec.contains("hash") ||
        !rec["hash"].is_string() || !rec.contains("text_len") ||
        !rec["text_len"].is_number_unsigned() || !rec.contains("vector") ||
        !rec["vector"].is_array()) {
      throw corrupt("missing or ill-typed field");
    }
    const auto hash_hex = rec["hash"].get<std::string>();
    std::uint64_t hash = 0;
    try {
      std::size_t used = 0;
      hash = std::stoull(hash_hex, &used, 16);
      if (used != hash_hex.size() || hash_hex.size() != 16) throw std::invalid_argument("");
    } catch (const std::exception&) {
      throw corrupt("hash must be 16 hex digits");
    }
    std::vector<double> comps;
    comps.reserve(rec["vector"].size());
    for (const auto& x : rec["vector"]) {
      if (!x.is_number()) throw corrupt("vector must hold numbers");
      comps.push_back(x.get<double>());
    }
    Entry entry{rec["text_len"].get<std::size_t>(), EmbeddingVector(std::move(comps))};
    by_hash_.emplace(hash, entry);
    entries_.insert_or_assign(key(rec["provider"].get<std::string>(), hash),
                              std::move(entry));
  }
}

std::string EmbeddingCache::key(std::string_view provider, std::uint64_t hash) {
  std::string k(provider);
  k += '\x1f';
  k += hex16(hash);
  return k;
}

std::optional<EmbeddingVector> EmbeddingCache::get(std::string_view provider,
                                                   std::string_view text) const {
  std::shared_lock lock(mu_);
  auto it = entries_.find(key(provider, fnv1a64(text)));
  if (it == entries_.end() || it->second.text_len != text.size()) {
    return std::nullopt;
  }
  return it->second.vector;
}

std::optional<EmbeddingVector> EmbeddingCache::get_any_provider(
    std::string_view text) const {
  std::shared_lock lock(mu_);
  auto it = by_hash_.find(fnv1a64(text));
  if (it == by_hash_.end() || it->second.text_len != text.size()) {
    return std::nullopt;
  }
  return it->second.vector;
}

void EmbeddingCache::put(std::string_view provider, std::string_view text,
                         const EmbeddingVector& v) {
  const auto hash = fnv1a64(text);
  std::unique_lock lock(mu_);
  auto [it, inserted] = entries_.try_emplace(key(provider, hash),
                                             Entry{text.size(), v});
  if (!inserted) return;
  by_hash_.try_emplace(hash, it->second);
  if (!path_ || !writable_) return;
  json rec;
  rec["provider"] = provider;
  rec["hash"] = hex16(hash);
  rec["text_len"] = text.size();
  rec["vector"] = v.components;
  std::ofstream out(*path_, std::ios::binary | std::ios::app);
  if (!out) {
    throw Error(ErrorCode::Io, "cannot append to cache " + path_->string());
  }
  out << rec.dump() << '\n';
}

std::size_t EmbeddingCache::size() const {
  std::shared_lock lock(mu_);
  return entries_.size();
}

// ---------------------------------------------------------------------------
// Remote transport

class Embedder::RemoteClient {
 public:
  explicit RemoteClient(const ProviderConfig& cfg)
      : cfg_(cfg), slots_(static_cast<std::ptrdiff_t>(cfg.max_in_flight)) {
    detail::Endpoint::parse(*cfg.endpoint);  // fail early on a bad URL
  }

  std::size_t requests() const noexcept { return requests_.load(); }

  // Embeds one batch; blocks while max_in_flight requests are outstanding.
  std::vector<EmbeddingVector> embed_chunk(std::span<const std::string> texts) {
    json body;
    body["texts"] = std::vector<std::string>(texts.begin(), texts.end());
    body["model"] = cfg_.model_name.value_or("");
    const auto payload = body.dump();

    slots_.acquire();
    auto client = checkout();
    detail::HttpResponse res;
    for (int attempt = 0;; ++attempt) {
      ++requests_;
      res = client->post_json("/embed", payload);
      if (res.status == 200 || !res.retryable() || attempt >= cfg_.max_retries) {
        break;
      }
      std::this_thread::sleep_for(
          detail::backoff_delay(cfg_.initial_backoff, attempt, res.retry_after));
    }
    checkin(std::move(client));
    slots_.release();

    if (res.status != 200) {
      throw Error(ErrorCode::ProviderUnavailable,
                  "embedding endpoint " + *cfg_.endpoint + " failed: " +
                      (res.transport_failed() ? res.transport_error
                                              : "HTTP " + std::to_string(res.status)));
    }
    return parse_embed_response(res.body, texts.size());
  }

  RemoteHealth health() {
    auto client = checkout();
    auto res = client->get("/health");
    checkin(std::move(client));
    if (res.status != 200) {
      throw Error(ErrorCode::ProviderUnavailable,
                  "health check failed: " +
                      (res.transport_failed() ? res.transport_error
                                              : "HTTP " + std::to_string(res.status)));
    }
    try {
      auto j = json::parse(res.body);
      return {j.at("status").get<std::string>(), j.value("model", ""),
              j.at("dim").get<std::size_t>()};
    } catch (const json::exception& e) {
      throw Error(ErrorCode::ProviderUnavailable,
                  std::string("malformed health response: ") + e.what());
    }
  }

 private:
  std::vector<EmbeddingVector> parse_embed_response(const std::string& body,
                                                    std::size_t expected) {
    json j;
    try {
      j = json::parse(body);
    } catch (const json::parse_error&) {
      throw Error(ErrorCode::ProviderUnavailable, "embedding response is not JSON");
    }
    if (!j.is_object() || !j.contains("vectors") || !j["vectors"].is_array() ||
        !j.contains("dim") || !j["dim"].is_number_unsigned()) {
      throw Error(ErrorCode::ProviderUnavailable,
                  "embedding response lacks vectors/dim");
    }
    if (j["vectors"].size() != expected) {
      throw Error(ErrorCode::ProviderUnavailable,
                  "embedding response has " + std::to_string(j["vectors"].size()) +
                      " rows for " + std::to_string(expected) + " texts");
    }
    const auto dim = j["dim"].get<std::size_t>();
    std::vector<EmbeddingVector> out;
    out.reserve(expected);
    for (const auto& row : j["vectors"]) {
      if (!row.is_array() || row.size() != dim) {
        throw Error(ErrorCode::DimensionMismatch,
                    "embedding row length differs from dim " + std::to_string(dim));
      }
      std::vector<double> comps;
      comps.reserve(dim);
      for (const auto& x : row) {
        if (!x.is_number()) {
          throw Error(ErrorCode::ProviderUnavailable, "non-numeric vector component");
        }
        comps.push_back(x.get<double>());
      }
      out.emplace_back(std::move(comps));
    }
    return out;
  }

  std::unique_ptr<detail::HttpClient> checkout() {
    {
      std::lock_guard lock(pool_mu_);
      if (!pool_.empty()) {
        auto c = std::move(pool_.back());
        pool_.pop_back();
        return c;
      }
    }
    return std::make_unique<detail::HttpClient>(*cfg_.endpoint, cfg_.timeout);
  }

  void checkin(std::unique_ptr<detail::HttpClient> c) {
    std::lock_guard lock(pool_mu_);
    pool_.push_back(std::move(c));
  }

  ProviderConfig cfg_;
  std::counting_semaphore<> slots_;
  std::mutex pool_mu_;
  std::vector<std::unique_ptr<detail::HttpClient>> pool_;
  std::atomic<std::size_t> requests_{0};
};

// ---------------------------------------------------------------------------
// Embedder

namespace {

EmbeddingCache make_cache(const ProviderConfig& cfg) {
  if (!cfg.cache_path) return EmbeddingCache();
  return EmbeddingCache(*cfg.cache_path,
                        cfg.kind != ProviderKind::Precomputed);
}

}  // namespace

Embedder::Embedder(ProviderConfig cfg)
    : cfg_([&] {
        cfg.validate();
        return std::move(cfg);
      }()),
      provider_id_(cfg_.provider_id()),
      cache_(make_cache(cfg_)),
      dim_(cfg_.dimension) {
  if (cfg_.kind == ProviderKind::Remote) {
    remote_ = std::make_unique<RemoteClient>(cfg_);
  }
}

Embedder::~Embedder() = default;

std::size_t Embedder::backend_calls() const noexcept {
  std::lock_guard lock(stats_mu_);
  return backend_calls_;
}

std::size_t Embedder::remote_requests() const noexcept {
  return remote_ ? remote_->requests() : 0;
}

void Embedder::check_dimension(std::size_t dim) {
  std::lock_guard lock(dim_mu_);
  if (!dim_) {
    dim_ = dim;
  } else if (*dim_ != dim) {
    throw Error(ErrorCode::DimensionMismatch,
                provider_id_ + " produced dimension " + std::to_string(dim) +
                    ", expected " + std::to_string(*dim_));
  }
}

std::vector<EmbeddingVector> Embedder::embed_remote(
    std::span<const std::string> texts) {
  const std::size_t batch = cfg_.max_batch;
  const std::size_t chunks = (texts.size() + batch - 1) / batch;
  std::vector<std::vector<EmbeddingVector>> results(chunks);
  if (chunks <= 1) {
    if (chunks == 1) results[0] = remote_->embed_chunk(texts);
  } else {
    std::atomic<std::size_t> next{0};
    std::mutex err_mu;
    std::exception_ptr first_error;
    const auto workers = std::min(chunks, cfg_.max_in_flight);
    {
      std::vector<std::jthread> pool;
      for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
          for (std::size_t c; (c = next++) < chunks;) {
            try {
              const auto begin = c * batch;
              const auto len = std::min(batch, texts.size() - begin);
              results[c] = remote_->embed_chunk(texts.subspan(begin, len));
            } catch (...) {
              std::lock_guard lock(err_mu);
              if (!first_error) first_error = std::current_exception();
            }
          }
        });
      }
    }
    if (first_error) std::rethrow_exception(first_error);
  }
  std::vector<EmbeddingVector> out;
  out.reserve(texts.size());
  for (auto& r : results) {
    for (auto& v : r) out.push_back(std::move(v));
  }
  return out;
}

EmbeddingMatrix Embedder::embed_batch(std::span<const std::string> texts) {
  EmbeddingMatrix m;
  m.provider_id = provider_id_;
  m.content_hash = content_hash(texts);
  m.rows.resize(texts.size());

  std::vector<std::string> missing;
  std::unordered_map<std::string_view, std::vector<std::size_t>> slots;
  for (std::size_t i = 0; i < texts.size(); ++i) {
    std::optional<EmbeddingVector> hit;
    if (cfg_.kind == ProviderKind::Precomputed) {
      // Vector files record the exporting model's name as the provider.
      hit = cfg_.model_name ? cache_.get(*cfg_.model_name, texts[i])
                            : cache_.get_any_provider(texts[i]);
    } else {
      hit = cache_.get(provider_id_, texts[i]);
    }
    if (hit) {
      m.rows[i] = std::move(*hit);
      continue;
    }
    auto& positions = slots[texts[i]];
    if (positions.empty()) missing.push_back(texts[i]);
    positions.push_back(i);
  }

  if (!missing.empty()) {
    std::vector<EmbeddingVector> fresh;
    switch (cfg_.kind) {
      case ProviderKind::HashedBow:
        fresh.reserve(missing.size());
        for (const auto& t : missing) {
          fresh.push_back(hashed_bow_embed(t, *cfg_.dimension));
        }
        break;
      case ProviderKind::Precomputed:
        throw Error(ErrorCode::MissingEmbedding,
                    "no precomputed vector for text (hash " +
                        hex16(fnv1a64(missing.front())) + ", " +
                        std::to_string(missing.size()) + " missing)");
      case ProviderKind::Remote:
        fresh = embed_remote(missing);
        break;
    }
    {
      std::lock_guard lock(stats_mu_);
      backend_calls_ += missing.size();
    }
    for (std::size_t k = 0; k < missing.size(); ++k) {
      auto& v = fresh[k];
      if (v.norm != 0.0 && std::abs(v.norm - 1.0) > 1e-6) normalize(v);
      cache_.put(provider_id_, missing[k], v);
      for (auto i : slots[missing[k]]) m.rows[i] = v;
    }
  }

  for (auto& row : m.rows) {
    if (row.norm != 0.0 && std::abs(row.norm - 1.0) > 1e-6) normalize(row);
    check_dimension(row.dimension());
  }
  m.dimension = m.rows.empty() ? dim_.value_or(0) : m.rows.front().dimension();
  return m;
}

RemoteHealth Embedder::health() {
  if (!remote_) {
    throw Error(ErrorCode::InvalidArgument, "health() requires a remote provider");
  }
  auto h = remote_->health();
  check_dimension(h.dim);
  return h;
}

EmbeddingMatrix embed_batch(const ProviderConfig& cfg,
                            std::span<const std::string> texts) {
  Embedder embedder(cfg);
  return embedder.embed_batch(texts);
}

}  // namespace cec
