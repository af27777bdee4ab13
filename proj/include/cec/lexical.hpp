#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "cec/embedder.hpp"
#include "cec/textseg.hpp"

namespace cec {

struct BleuParams {
  std::size_t max_order = 4;
  double epsilon = 0.1;  // zero-match order: p_n = epsilon / |candidate n-grams|
};

/// Sentence-level BLEU with effective order min(max_order, |gen|), clipped
/// n-gram precisions, epsilon smoothing and brevity penalty
/// min(1, exp(1 - |ref|/|gen|)). 0 when either side is empty.
double bleu(const TokenSequence& gen, const TokenSequence& ref,
            const BleuParams& params = {});

enum class RougeVariant { R1, R2, RL };

/// F1 of clipped unigram / bigram overlap, or of LCS length for RL.
/// 0 when either side has no units to compare.
double rouge(const TokenSequence& gen, const TokenSequence& ref,
             RougeVariant variant);

std::size_t lcs_length(const std::vector<std::string>& x,
                       const std::vector<std::string>& y);

struct MeteorParams {
  double alpha = 0.9;
  double beta = 3.0;
  double gamma = 0.5;
  /// Search budget for the chunk-minimizing alignment; once exhausted the
  /// best alignment found so far is used.
  std::size_t node_budget = 200000;
};

/// Exact-match unigram alignment with the maximum number of matches and,
/// among those, the fewest chunks.
struct MeteorAlignment {
  std::size_t matches = 0;
  std::size_t chunks = 0;
  std::vector<long> gen_to_ref;  // -1 when unmatched
  bool optimal = true;           // false if the search budget ran out
};

MeteorAlignment meteor_align(const TokenSequence& gen, const TokenSequence& ref,
                             std::size_t node_budget = MeteorParams{}.node_budget);

/// F_mean * (1 - gamma * (chunks / matches)^beta), with
/// F_mean = P R / (alpha P + (1 - alpha) R). 0 when nothing matches.
double meteor(const TokenSequence& gen, const TokenSequence& ref,
              const MeteorParams& params = {});

/// Greedy token-embedding F1: precision is the mean best cosine of each
/// generated token to the reference tokens, recall the converse. Returns the
/// harmonic mean when both are positive, otherwise 0; 0 when either side is
/// empty.
double embf1(const TokenSequence& gen, const TokenSequence& ref,
             Embedder& embedder);

struct BaselineScores {
  double bleu = 0.0;
  double rouge1 = 0.0;
  double rouge2 = 0.0;
  double rougeL = 0.0;
  double meteor = 0.0;
  double embf1 = 0.0;
};

BaselineScores baseline_scores(std::string_view gen_text,
                               std::string_view ref_text, Embedder& embedder);

}  // namespace cec
