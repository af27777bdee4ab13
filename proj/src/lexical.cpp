#include "cec/lexical.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <unordered_map>

namespace cec {

namespace {

using Ngram = std::vector<std::string>;

std::map<Ngram, std::size_t> ngram_counts(const std::vector<std::string>& toks,
                                          std::size_t n) {
  std::map<Ngram, std::size_t> counts;
  if (toks.size() < n) return counts;
  for (std::size_t i = 0; i + n <= toks.size(); ++i) {
    ++counts[Ngram(toks.begin() + i, toks.begin() + i + n)];
  }
  return counts;
}

std::size_t clipped_overlap(const std::map<Ngram, std::size_t>& cand,
                            const std::map<Ngram, std::size_t>& ref) {
  std::size_t total = 0;
  for (const auto& [gram, c] : cand) {
    auto it = ref.find(gram);
    if (it != ref.end()) total += std::min(c, it->second);
  }
  return total;
}

double f1(double p, double r) {
  return (p + r) > 0.0 ? 2.0 * p * r / (p + r) : 0.0;
}

double rouge_n(const TokenSequence& gen, const TokenSequence& ref,
               std::size_t n) {
  if (gen.size() < n || ref.size() < n) return 0.0;
  const auto overlap =
      static_cast<double>(clipped_overlap(ngram_counts(gen.tokens, n),
                                          ngram_counts(ref.tokens, n)));
  const double p = overlap / static_cast<double>(gen.size() - n + 1);
  const double r = overlap / static_cast<double>(ref.size() - n + 1);
  return f1(p, r);
}

// Depth-first search over gen positions for the alignment with the maximum
// number of matches and the fewest chunks. Forced choices (a word that
// occurs once on each side) never branch.
class ChunkSearch {
 public:
  ChunkSearch(const TokenSequence& gen, const TokenSequence& ref,
              std::size_t budget)
      : budget_(budget) {
    std::unordered_map<std::string, int> ids;
    auto id_of = [&](const std::string& t) {
      auto [it, _] = ids.try_emplace(t, static_cast<int>(ids.size()));
      return it->second;
    };
    for (const auto& t : gen.tokens) gen_.push_back(id_of(t));
    for (const auto& t : ref.tokens) ref_.push_back(id_of(t));
    const std::size_t vocab = ids.size();
    std::vector<std::size_t> cg(vocab, 0);
    std::vector<std::size_t> cr(vocab, 0);
    ref_positions_.resize(vocab);
    for (int w : gen_) ++cg[w];
    for (std::size_t j = 0; j < ref_.size(); ++j) {
      ++cr[ref_[j]];
      ref_positions_[ref_[j]].push_back(j);
    }
    skip_allowance_.resize(vocab);
    for (std::size_t w = 0; w < vocab; ++w) {
      const auto matched = std::min(cg[w], cr[w]);
      target_ += matched;
      skip_allowance_[w] = cg[w] - matched;
    }
    used_.assign(ref_.size(), false);
    current_.assign(gen_.size(), -1);
  }

  MeteorAlignment run() {
    MeteorAlignment out;
    out.matches = target_;
    if (target_ == 0) {
      out.gen_to_ref.assign(gen_.size(), -1);
      return out;
    }
    dfs(0, -1, 0, 0);
    out.chunks = best_chunks_;
    out.gen_to_ref = best_;
    out.optimal = !exhausted_;
    return out;
  }

 private:
  void dfs(std::size_t i, long prev_ref, std::size_t chunks,
           std::size_t matched) {
    if (exhausted_) return;
    if (++nodes_ > budget_ && have_best_) {
      exhausted_ = true;
      return;
    }
    // A pending match after an unmatched (or no) predecessor opens a chunk.
    const std::size_t bound =
        chunks + ((matched < target_ && prev_ref < 0) ? 1 : 0);
    if (have_best_ && bound >= best_chunks_) return;
    if (i == gen_.size()) {
      best_chunks_ = chunks;
      best_ = current_;
      have_best_ = true;
      return;
    }
    const int w = gen_[i];
    // Continue the current chunk first.
    if (prev_ref >= 0) {
      const auto next = static_cast<std::size_t>(prev_ref + 1);
      if (next < ref_.size() && !used_[next] && ref_[next] == w) {
        take(i, next, chunks, matched);
      }
    }
    for (std::size_t j : ref_positions_[w]) {
      if (used_[j]) continue;
      if (prev_ref >= 0 && j == static_cast<std::size_t>(prev_ref + 1)) continue;
      take(i, j, chunks + 1, matched);
      if (exhausted_) return;
    }
    if (skip_allowance_[w] > 0) {
      --skip_allowance_[w];
      dfs(i + 1, -1, chunks, matched);
      ++skip_allowance_[w];
    }
  }

  void take(std::size_t i, std::size_t j, std::size_t chunks,
            std::size_t matched) {
    used_[j] = true;
    current_[i] = static_cast<long>(j);
    dfs(i + 1, static_cast<long>(j), chunks, matched + 1);
    current_[i] = -1;
    used_[j] = false;
  }

  std::vector<int> gen_;
  std::vector<int> ref_;
  std::vector<std::vector<std::size_t>> ref_positions_;
  std::vector<std::size_t> skip_allowance_;
  std::vector<bool> used_;
  std::vector<long> current_;
  std::vector<long> best_;
  std::size_t target_ = 0;
  std::size_t best_chunks_ = 0;
  bool have_best_ = false;
  bool exhausted_ = false;
  std::size_t nodes_ = 0;
  std::size_t budget_;
};

}  // namespace

double bleu(const TokenSequence& gen, const TokenSequence& ref,
            const BleuParams& params) {
  if (gen.empty() || ref.empty()) return 0.0;
  const std::size_t order = std::min(params.max_order, gen.size());
  double log_sum = 0.0;
  for (std::size_t n = 1; n <= order; ++n) {
    const auto cand = ngram_counts(gen.tokens, n);
    const auto refc = ngram_counts(ref.tokens, n);
    const auto total = static_cast<double>(gen.size() - n + 1);
    const auto matches = static_cast<double>(clipped_overlap(cand, refc));
    const double p = matches > 0.0 ? matches / total : params.epsilon / total;
    log_sum += std::log(p);
  }
  const double ratio =
      static_cast<double>(ref.size()) / static_cast<double>(gen.size());
  const double bp = std::min(1.0, std::exp(1.0 - ratio));
  return bp * std::exp(log_sum / static_cast<double>(order));
}

std::size_t lcs_length(const std::vector<std::string>& x,
                       const std::vector<std::string>& y) {
  std::vector<std::size_t> prev(y.size() + 1, 0);
  std::vector<std::size_t> cur(y.size() + 1, 0);
  for (std::size_t i = 1; i <= x.size(); ++i) {
    for (std::size_t j = 1; j <= y.size(); ++j) {
      cur[j] = x[i - 1] == y[j - 1] ? prev[j - 1] + 1
                                    : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[y.size()];
}

double rouge(const TokenSequence& gen, const TokenSequence& ref,
             RougeVariant variant) {
  switch (variant) {
    case RougeVariant::R1: return rouge_n(gen, ref, 1);
    case RougeVariant::R2: return rouge_n(gen, ref, 2);
    case RougeVariant::RL: {
      if (gen.empty() || ref.empty()) return 0.0;
      const auto lcs = static_cast<double>(lcs_length(gen.tokens, ref.tokens));
      return f1(lcs / static_cast<double>(gen.size()),
                lcs / static_cast<double>(ref.size()));
    }
  }
  return 0.0;
}

MeteorAlignment meteor_align(const TokenSequence& gen, const TokenSequence& ref,
                             std::size_t node_budget) {
  return ChunkSearch(gen, ref, node_budget).run();
}

double meteor(const TokenSequence& gen, const TokenSequence& ref,
              const MeteorParams& params) {
  if (gen.empty() || ref.empty()) return 0.0;
  const auto align = meteor_align(gen, ref, params.node_budget);
  if (align.matches == 0) return 0.0;
  const auto m = static_cast<double>(align.matches);
  const double p = m / static_cast<double>(gen.size());
  const double r = m / static_cast<double>(ref.size());
  const double fmean = p * r / (params.alpha * p + (1.0 - params.alpha) * r);
  const double frag = static_cast<double>(align.chunks) / m;
  const double penalty = params.gamma * std::pow(frag, params.beta);
  return fmean * (1.0 - penalty);
}

double embf1(const TokenSequence& gen, const TokenSequence& ref,
             Embedder& embedder) {
  if (gen.empty() || ref.empty()) return 0.0;
  std::vector<std::string> vocab;
  std::unordered_map<std::string, std::size_t> index;
  for (const auto* seq : {&gen, &ref}) {
    for (const auto& t : seq->tokens) {
      if (index.try_emplace(t, vocab.size()).second) vocab.push_back(t);
    }
  }
  const auto emb = embedder.embed_batch(vocab);
  auto vec = [&](const std::string& t) -> const EmbeddingVector& {
    return emb.rows[index.at(t)];
  };
  auto directional = [&](const TokenSequence& from, const TokenSequence& to) {
    double total = 0.0;
    for (const auto& a : from.tokens) {
      double best = -1.0;
      for (const auto& b : to.tokens) best = std::max(best, cosine(vec(a), vec(b)));
      total += best;
    }
    return total / static_cast<double>(from.size());
  };
  const double p = directional(gen, ref);
  const double r = directional(ref, gen);
  if (p <= 0.0 || r <= 0.0) return 0.0;
  return 2.0 * p * r / (p + r);
}

BaselineScores baseline_scores(std::string_view gen_text,
                               std::string_view ref_text, Embedder& embedder) {
  const auto gen = tokenize(gen_text);
  const auto ref = tokenize(ref_text);
  BaselineScores s;
  s.bleu = bleu(gen, ref);
  s.rouge1 = rouge(gen, ref, RougeVariant::R1);
  s.rouge2 = rouge(gen, ref, RougeVariant::R2);
  s.rougeL = rouge(gen, ref, RougeVariant::RL);
  s.meteor = meteor(gen, ref);
  s.embf1 = embf1(gen, ref, embedder);
  return s;
}

}  // namespace cec
