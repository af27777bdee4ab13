#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cec/corpus.hpp"
#include "cec/embedder.hpp"
#include "cec/textseg.hpp"

namespace cec {

/// Best partner of one sentence on the other side.
struct AlignmentLink {
  std::size_t index;    // sentence on this side
  std::size_t partner;  // argmax on the other side, lowest index on ties
  double similarity;

  bool operator==(const AlignmentLink&) const = default;
};

/// Symmetric Causal Explanation Coherence of one generation/reference pair.
///
/// forward  = mean over generated sentences of the best cosine to any
///            reference sentence (coverage)
/// backward = mean over reference sentences of the best cosine to any
///            generated sentence (faithfulness)
/// symmetric = (forward + backward) / 2
///
/// When exactly one side is empty the result is degenerate: all three scores
/// are 0 and both alignment lists are empty.
struct CecResult {
  double forward = 0.0;
  double backward = 0.0;
  double symmetric = 0.0;
  std::size_t n = 0;  // generated sentences
  std::size_t m = 0;  // reference sentences
  bool degenerate = false;
  std::vector<AlignmentLink> forward_alignment;   // length n
  std::vector<AlignmentLink> backward_alignment;  // length m
};

/// Scores already-embedded sentence sets. Throws BothExplanationsEmpty when
/// both are empty and DimensionMismatch on unequal row dimensions.
CecResult cec_from_embeddings(const EmbeddingMatrix& gen,
                              const EmbeddingMatrix& ref);

CecResult cec_instance(const SentenceSet& gen, const SentenceSet& ref,
                       Embedder& embedder);
/// Same, with a transient embedder built from `provider`.
CecResult cec_instance(const SentenceSet& gen, const SentenceSet& ref,
                       const ProviderConfig& provider);

struct AggregateScore {
  double mean = 0.0;
  double sd = 0.0;  // sample SD (n - 1); 0 when count == 1
  double min = 0.0;
  double max = 0.0;
  std::size_t count = 0;    // instances that contributed
  std::size_t skipped = 0;  // eligible but degenerate
};

struct CorpusScoreOptions {
  const AbbreviationList* abbreviations = &AbbreviationList::builtin();
  std::size_t jobs = 1;
};

/// Per-instance CEC for every corpus instance eligible for `model`, in corpus
/// order. Degenerate pairs (including both sides empty) are reported with
/// degenerate = true rather than raised.
std::vector<std::pair<std::string, CecResult>> cec_per_instance(
    const Corpus& corpus, std::string_view model, Embedder& embedder,
    const CorpusScoreOptions& opts = {});

/// Mean, SD, min and max of the symmetric score over eligible, non-degenerate
/// instances. Throws NoEligibleInstances when nothing is left to aggregate.
AggregateScore cec_corpus(const Corpus& corpus, std::string_view model,
                          Embedder& embedder,
                          const CorpusScoreOptions& opts = {});

}  // namespace cec
