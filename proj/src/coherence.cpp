#include "cec/coherence.hpp"

#include <algorithm>
#include <optional>

#include "cec/error.hpp"
#include "cec/parallel.hpp"
#include "cec/stats.hpp"

namespace cec {

namespace {

// Best partner for each row of `from` among the rows of `to`; ties keep the
// lowest index. Returns the mean of the best similarities.
double best_matches(const std::vector<std::vector<double>>& sim, bool by_row,
                    std::size_t rows, std::size_t cols,
                    std::vector<AlignmentLink>& links) {
  links.clear();
  links.reserve(by_row ? rows : cols);
  const std::size_t outer = by_row ? rows : cols;
  const std::size_t inner = by_row ? cols : rows;
  double total = 0.0;
  for (std::size_t a = 0; a < outer; ++a) {
    std::size_t best = 0;
    double best_sim = by_row ? sim[a][0] : sim[0][a];
    for (std::size_t b = 1; b < inner; ++b) {
      const double s = by_row ? sim[a][b] : sim[b][a];
      if (s > best_sim) {
        best_sim = s;
        best = b;
      }
    }
    links.push_back({a, best, best_sim});
    total += best_sim;
  }
  return total / static_cast<double>(outer);
}

}  // namespace

CecResult cec_from_embeddings(const EmbeddingMatrix& gen,
                              const EmbeddingMatrix& ref) {
  CecResult r;
  r.n = gen.size();
  r.m = ref.size();
  if (r.n == 0 && r.m == 0) {
    throw Error(ErrorCode::BothExplanationsEmpty,
                "generated and reference explanations are both empty");
  }
  if (r.n == 0 || r.m == 0) {
    r.degenerate = true;
    return r;
  }
  std::vector<std::vector<double>> sim(r.n, std::vector<double>(r.m));
  for (std::size_t i = 0; i < r.n; ++i) {
    for (std::size_t j = 0; j < r.m; ++j) {
      sim[i][j] = cosine(gen.rows[i], ref.rows[j]);
    }
  }
  r.forward = best_matches(sim, true, r.n, r.m, r.forward_alignment);
  r.backward = best_matches(sim, false, r.n, r.m, r.backward_alignment);
  r.symmetric = 0.5 * (r.forward + r.backward);
  return r;
}

CecResult cec_instance(const SentenceSet& gen, const SentenceSet& ref,
                       Embedder& embedder) {
  if (gen.empty() && ref.empty()) {
    throw Error(ErrorCode::BothExplanationsEmpty,
                "generated and reference explanations are both empty");
  }
  const auto g = embedder.embed_batch(gen.sentences);
  const auto a = embedder.embed_batch(ref.sentences);
  return cec_from_embeddings(g, a);
}

CecResult cec_instance(const SentenceSet& gen, const SentenceSet& ref,
                       const ProviderConfig& provider) {
  Embedder embedder(provider);
  return cec_instance(gen, ref, embedder);
}

std::vector<std::pair<std::string, CecResult>> cec_per_instance(
    const Corpus& corpus, std::string_view model, Embedder& embedder,
    const CorpusScoreOptions& opts) {
  std::vector<const Instance*> eligible;
  for (const auto& inst : corpus.instances) {
    if (is_eligible(inst, model)) eligible.push_back(&inst);
  }
  std::vector<std::pair<std::string, CecResult>> out(eligible.size());
  parallel_for(eligible.size(), opts.jobs, [&](std::size_t k) {
    const Instance& inst = *eligible[k];
    const auto gen = segment(inst.generations.at(std::string(model)),
                             *opts.abbreviations, Origin::Generated);
    const auto ref = segment(*inst.reference_explanation, *opts.abbreviations,
                             Origin::Reference);
    CecResult r;
    if (gen.empty() && ref.empty()) {
      r.degenerate = true;
    } else {
      r = cec_instance(gen, ref, embedder);
    }
    out[k] = {inst.id, std::move(r)};
  });
  return out;
}

AggregateScore cec_corpus(const Corpus& corpus, std::string_view model,
                          Embedder& embedder, const CorpusScoreOptions& opts) {
  const auto per = cec_per_instance(corpus, model, embedder, opts);
  AggregateScore agg;
  std::vector<double> scores;
  for (const auto& [id, r] : per) {
    if (r.degenerate) {
      ++agg.skipped;
    } else {
      scores.push_back(r.symmetric);
    }
  }
  if (scores.empty()) {
    throw Error(ErrorCode::NoEligibleInstances,
                "no scorable instances for model '" + std::string(model) +
                    "' (" + std::to_string(agg.skipped) + " degenerate)");
  }
  const auto d = descriptive(scores);
  agg.mean = d.mean;
  agg.sd = d.sd;
  agg.min = d.min;
  agg.max = d.max;
  agg.count = d.n;
  return agg;
}

}  // namespace cec
