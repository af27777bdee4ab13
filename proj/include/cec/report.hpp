#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cec/coherence.hpp"
#include "cec/corpus.hpp"
#include "cec/embedder.hpp"
#include "cec/lexical.hpp"
#include "cec/stats.hpp"
#include "cec/textseg.hpp"

namespace cec {

/// Report columns, in table order.
enum class Metric { Bleu, Rouge1, Rouge2, RougeL, Meteor, EmbF1, Cec };
inline constexpr std::array<Metric, 7> kReportMetrics = {
    Metric::Bleu,   Metric::Rouge1, Metric::Rouge2, Metric::RougeL,
    Metric::Meteor, Metric::EmbF1,  Metric::Cec};

/// Column header ("ROUGE-1", "EmbF1", ...).
std::string_view display_name(Metric m) noexcept;
/// Field name in per-instance JSONL ("rouge1", "cec_sym", ...).
std::string_view field_name(Metric m) noexcept;
/// Declared range of the metric's values.
std::pair<double, double> metric_range(Metric m) noexcept;

struct InstanceScore {
  std::string id;
  std::string model;
  BaselineScores baseline;
  double cec_forward = 0.0;
  double cec_backward = 0.0;
  double cec_sym = 0.0;
  std::size_t n = 0;
  std::size_t m = 0;
  bool degenerate = false;

  double value(Metric metric) const noexcept;
};

struct ModelRow {
  std::string model;
  std::array<double, kReportMetrics.size()> mean{};
  std::array<double, kReportMetrics.size()> sd{};
};

struct MetricReport {
  std::vector<ModelRow> rows;
  std::size_t n_instances = 0;          // rows are computed over these
  std::size_t skipped_degenerate = 0;   // degenerate for at least one model
  std::size_t excluded_incomplete = 0;  // missing reference or a generation
  bool partial = false;
  std::string provider_id;
  std::uint64_t config_digest = 0;
};

struct ScoreOptions {
  std::vector<std::string> models;
  const AbbreviationList* abbreviations = &AbbreviationList::builtin();
  std::size_t jobs = 1;
  BleuParams bleu;
  MeteorParams meteor;
};

struct ScoreRun {
  MetricReport report;
  std::vector<InstanceScore> instances;  // instance-major, then model order
};

/// Scores every model on the instances that have a reference and all
/// requested generations. Aggregates exclude instances that are degenerate
/// for any model so all rows share one instance set. Throws
/// NoEligibleInstances when no instance survives.
ScoreRun score_corpus(const Corpus& corpus, const ScoreOptions& opts,
                      Embedder& embedder);

enum class ReportFormat { Markdown, Csv, Json };
std::optional<ReportFormat> parse_report_format(std::string_view text);

std::string render_report(const MetricReport& report, ReportFormat format);

/// JSONL, one object per (instance, model):
/// {"id","model","cec_forward","cec_backward","cec_sym","n","m",
///  "degenerate","bleu","rouge1","rouge2","rougeL","meteor","embf1"}
std::string instance_scores_jsonl(const std::vector<InstanceScore>& scores);

/// A per-instance record read back from JSONL. Metric values not present in
/// the record are absent from `values`.
struct ScoreRecord {
  std::string id;
  std::string model;
  bool degenerate = false;
  std::vector<std::pair<std::string, double>> values;

  std::optional<double> get(std::string_view field) const;
};

/// Throws MalformedLine / SchemaViolation (as CorpusError) on bad lines.
std::vector<ScoreRecord> parse_instance_scores(std::istream& in);

/// Resolves a CLI metric name ("cec", "embf1", "rougeL", "cec_forward", ...)
/// to its JSONL field and display label.
struct MetricRef {
  std::string field;
  std::string label;
};
std::optional<MetricRef> resolve_metric(std::string_view name);

struct CompareOptions {
  std::string metric_a = "cec";
  std::string metric_b = "embf1";
  std::size_t n = 100;
  std::uint64_t seed = 0;
  std::optional<std::string> model;  // restrict to one model's records
  WilcoxonMode wilcoxon = WilcoxonMode::Auto;
};

struct ComparisonSummary {
  std::string comparison;  // e.g. "CEC_vs_EmbF1"
  std::string metric_a;
  std::string metric_b;
  std::uint64_t seed = 0;
  std::vector<std::string> sampled_ids;
  PairedTestResult result;
};

/// Samples n non-degenerate records (file order is the eligible order) and
/// runs the paired t-test, Wilcoxon signed-rank test, effect sizes and
/// descriptives. Throws InsufficientInstances or ZeroVariance.
ComparisonSummary compare_scores(const std::vector<ScoreRecord>& records,
                                 const CompareOptions& opts);

std::string comparison_json(const ComparisonSummary& summary);

}  // namespace cec
