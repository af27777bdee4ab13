// cectool: validate corpora, generate teacher explanations, score models and
// compare metrics.
//
// Exit codes: 0 ok, 1 validation failure, 2 runtime error.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "cec/coherence.hpp"
#include "cec/corpus.hpp"
#include "cec/embedder.hpp"
#include "cec/error.hpp"
#include "cec/fileio.hpp"
#include "cec/report.hpp"
#include "cec/stats.hpp"
#include "cec/teacher.hpp"
#include "cec/textseg.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInvalid = 1;
constexpr int kExitRuntime = 2;

ordered_json finding_json(const cec::Finding& f) {
  ordered_json j;
  j["severity"] = f.severity == cec::Severity::Error ? "error" : "warning";
  j["code"] = f.code;
  j["line"] = f.line;
  if (!f.field.empty()) j["field"] = f.field;
  if (!f.id.empty()) j["id"] = f.id;
  j["message"] = f.message;
  return j;
}

fs::path instances_path_for(const fs::path& out) {
  auto p = out;
  p.replace_extension(".instances.jsonl");
  return p;
}

struct ValidateArgs {
  std::string corpus;
  bool require_reference = false;
  std::vector<std::string> models;
};

int run_validate(const ValidateArgs& args) {
  std::ifstream in(args.corpus, std::ios::binary);
  if (!in) throw cec::Error(cec::ErrorCode::Io, "cannot open " + args.corpus);
  auto parsed = cec::parse_corpus_lenient(in, args.corpus);
  const auto summary = cec::validate_corpus(parsed.corpus, args.require_reference,
                                            args.models);
  if (args.require_reference && summary.missing_reference > 0) {
    parsed.findings.push_back({cec::Severity::Error, "MissingReference", 0, {}, {},
                               std::to_string(summary.missing_reference) +
                                   " instances lack reference_explanation"});
  }
  for (const auto& [model, missing] : summary.missing_generation) {
    if (missing > 0) {
      parsed.findings.push_back({cec::Severity::Error, "MissingGeneration", 0,
                                 "generations", {},
                                 std::to_string(missing) +
                                     " instances lack a generation for '" +
                                     model + "'"});
    }
  }
  ordered_json j;
  j["corpus"] = args.corpus;
  j["ok"] = !parsed.has_errors();
  j["instances"] = summary.total;
  ordered_json s;
  s["missing_reference"] = summary.missing_reference;
  s["missing_generation"] = summary.missing_generation;
  s["over_evidence_cap"] = summary.over_evidence_cap;
  s["empty"] = summary.empty;
  j["summary"] = std::move(s);
  j["findings"] = ordered_json::array();
  for (const auto& f : parsed.findings) j["findings"].push_back(finding_json(f));
  std::cout << j.dump(2) << '\n';
  return parsed.has_errors() ? kExitInvalid : kExitOk;
}

struct ProviderArgs {
  std::string provider = "hashed-bow";
  std::size_t dim = cec::kDefaultHashedDimension;
  bool dim_set = false;
  std::string endpoint;
  std::string model_name;
  std::string cache;
  std::size_t max_in_flight = 4;
};

cec::ProviderConfig make_provider(const ProviderArgs& a) {
  const auto kind = cec::parse_provider_kind(a.provider);
  if (!kind) {
    throw cec::Error(cec::ErrorCode::InvalidArgument,
                     "unknown provider '" + a.provider + "'");
  }
  cec::ProviderConfig cfg;
  cfg.kind = *kind;
  if (*kind == cec::ProviderKind::HashedBow || a.dim_set) cfg.dimension = a.dim;
  if (!a.endpoint.empty()) cfg.endpoint = a.endpoint;
  if (!a.model_name.empty()) cfg.model_name = a.model_name;
  if (!a.cache.empty()) cfg.cache_path = a.cache;
  cfg.max_in_flight = a.max_in_flight;
  return cfg;
}

struct ScoreArgs {
  std::string corpus;
  std::vector<std::string> models;
  ProviderArgs provider;
  std::string out;
  std::string instances_out;
  std::string format = "md";
  std::string abbreviations;
  std::size_t jobs = 1;
};

int run_score(const ScoreArgs& args) {
  const auto format = cec::parse_report_format(args.format);
  if (!format) {
    throw cec::Error(cec::ErrorCode::InvalidArgument,
                     "unknown format '" + args.format + "'");
  }
  std::vector<cec::Finding> warnings;
  const auto corpus = cec::load_corpus(args.corpus, &warnings);
  for (const auto& w : warnings) std::cerr << "warning: " << w.message << '\n';

  const auto abbreviations = args.abbreviations.empty()
                                 ? cec::AbbreviationList::builtin()
                                 : cec::AbbreviationList::load(args.abbreviations);
  cec::ScoreOptions opts;
  opts.models = args.models;
  opts.abbreviations = &abbreviations;
  opts.jobs = args.jobs;
  cec::Embedder embedder(make_provider(args.provider));
  const auto run = cec::score_corpus(corpus, opts, embedder);

  const fs::path out(args.out);
  const fs::path inst_out =
      args.instances_out.empty() ? instances_path_for(out) : fs::path(args.instances_out);
  cec::write_file_atomic(out, cec::render_report(run.report, *format));
  cec::write_file_atomic(inst_out, cec::instance_scores_jsonl(run.instances));
  if (run.report.excluded_incomplete > 0) {
    std::cerr << "warning: " << run.report.excluded_incomplete
              << " instances lack a reference or a requested generation\n";
  }
  if (run.report.partial) {
    std::cerr << "warning: partial report, " << run.report.skipped_degenerate
              << " degenerate instances skipped\n";
  }
  std::cerr << "wrote " << out.string() << " and " << inst_out.string() << '\n';
  return kExitOk;
}

struct CompareArgs {
  std::string scores;
  std::string metric_a = "cec";
  std::string metric_b = "embf1";
  std::size_t n = 100;
  std::uint64_t seed = 0;
  std::string model;
  std::string wilcoxon = "auto";
  std::string out;
};

int run_compare(const CompareArgs& args) {
  std::ifstream in(args.scores, std::ios::binary);
  if (!in) throw cec::Error(cec::ErrorCode::Io, "cannot open " + args.scores);
  const auto records = cec::parse_instance_scores(in);
  cec::CompareOptions opts;
  opts.metric_a = args.metric_a;
  opts.metric_b = args.metric_b;
  opts.n = args.n;
  opts.seed = args.seed;
  if (!args.model.empty()) opts.model = args.model;
  if (args.wilcoxon == "exact") {
    opts.wilcoxon = cec::WilcoxonMode::Exact;
  } else if (args.wilcoxon == "normal") {
    opts.wilcoxon = cec::WilcoxonMode::Normal;
  } else if (args.wilcoxon != "auto") {
    throw cec::Error(cec::ErrorCode::InvalidArgument,
                     "--wilcoxon must be auto, exact or normal");
  }
  cec::ComparisonSummary summary;
  try {
    summary = cec::compare_scores(records, opts);
  } catch (const cec::Error& e) {
    if (e.code() == cec::ErrorCode::ZeroVariance) {
      std::cerr << "error: " << e.what()
                << "\nhint: the two metrics differ by the same amount on every "
                   "sampled pair (or are identical); compare different metrics "
                   "or a larger sample.\n";
      return kExitRuntime;
    }
    throw;
  }
  const auto text = cec::comparison_json(summary);
  if (args.out.empty()) {
    std::cout << text;
  } else {
    cec::write_file_atomic(args.out, text);
  }
  return kExitOk;
}

struct GenerateArgs {
  std::string corpus;
  std::string template_path;
  std::string endpoint;
  std::string model = "teacher";
  std::string out;
  std::string cache;
  double rpm = 60.0;
  std::size_t jobs = 2;
  std::size_t max_tokens = 512;
  double temperature = 0.0;
  int retries = 3;
  long backoff_ms = 500;
};

int run_generate(const GenerateArgs& args) {
  const auto corpus = cec::load_corpus(args.corpus);
  const auto tpl = args.template_path.empty()
                       ? cec::PromptTemplate::builtin()
                       : cec::PromptTemplate::load(args.template_path);
  cec::TeacherConfig cfg;
  cfg.endpoint = args.endpoint;
  cfg.model = args.model;
  cfg.requests_per_minute = args.rpm;
  cfg.max_concurrency = args.jobs;
  cfg.max_tokens = args.max_tokens;
  cfg.temperature = args.temperature;
  cfg.max_retries = args.retries;
  cfg.initial_backoff = std::chrono::milliseconds(args.backoff_ms);
  if (!args.cache.empty()) cfg.cache_path = args.cache;
  cfg.load_api_key_from_environment();
  if (!cfg.api_key) {
    std::cerr << "warning: TEACHER_API_KEY is not set; sending no credentials\n";
  }

  const auto outcome = cec::generate_explanations(corpus, tpl, cfg);
  cec::write_file_atomic(args.out, cec::serialize_corpus(outcome.corpus));

  const auto& r = outcome.report;
  ordered_json j;
  j["generated"] = r.generated;
  j["from_cache"] = r.from_cache;
  j["skipped"] = r.skipped;
  j["failed"] = r.failed;
  j["not_attempted"] = r.not_attempted;
  j["network_calls"] = r.network_calls;
  j["retries"] = r.retries;
  j["aborted"] = r.aborted;
  j["failures"] = ordered_json::array();
  for (const auto& f : r.failures) {
    j["failures"].push_back({{"id", f.instance_id},
                             {"code", f.code},
                             {"attempts", f.attempts},
                             {"message", f.message}});
  }
  std::cout << j.dump(2) << '\n';
  return (r.failed > 0 || r.aborted) ? kExitRuntime : kExitOk;
}

int exit_code_for(const cec::Error& e) {
  switch (e.code()) {
    case cec::ErrorCode::MalformedLine:
    case cec::ErrorCode::SchemaViolation:
    case cec::ErrorCode::DuplicateId:
      return kExitInvalid;
    default:
      return kExitRuntime;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Explanation coherence and baseline metric toolkit"};
  app.require_subcommand(1);

  ValidateArgs validate;
  auto* cmd_validate = app.add_subcommand("validate", "Check a corpus against the JSONL schema");
  cmd_validate->add_option("--corpus", validate.corpus, "Corpus JSONL")->required();
  cmd_validate->add_flag("--require-reference", validate.require_reference,
                         "Treat missing reference explanations as errors");
  cmd_validate->add_option("--models", validate.models,
                           "Models whose generations must be present")
      ->delimiter(',');

  GenerateArgs generate;
  auto* cmd_generate = app.add_subcommand("generate", "Fill reference explanations from a teacher endpoint");
  cmd_generate->add_option("--corpus", generate.corpus, "Input corpus JSONL")->required();
  cmd_generate->add_option("--template", generate.template_path,
                           "Prompt template JSON {\"system\",\"user\"}");
  cmd_generate->add_option("--endpoint", generate.endpoint, "Chat endpoint base URL")->required();
  cmd_generate->add_option("--model", generate.model, "Teacher model name");
  cmd_generate->add_option("--out", generate.out, "Output corpus JSONL")->required();
  cmd_generate->add_option("--cache", generate.cache, "Response cache JSONL");
  cmd_generate->add_option("--rpm", generate.rpm, "Requests per minute (0 = unlimited)");
  cmd_generate->add_option("--jobs", generate.jobs, "Concurrent requests");
  cmd_generate->add_option("--max-tokens", generate.max_tokens, "max_tokens per request");
  cmd_generate->add_option("--temperature", generate.temperature, "Sampling temperature");
  cmd_generate->add_option("--retries", generate.retries, "Retries on 429/5xx");
  cmd_generate->add_option("--backoff-ms", generate.backoff_ms, "Initial retry backoff");

  ScoreArgs score;
  auto* cmd_score = app.add_subcommand("score", "Compute all metrics per model");
  cmd_score->add_option("--corpus", score.corpus, "Corpus JSONL")->required();
  cmd_score->add_option("--models", score.models, "Models to score")->required()->delimiter(',');
  cmd_score->add_option("--provider", score.provider.provider,
                        "hashed-bow | precomputed | remote");
  auto* dim_opt = cmd_score->add_option("--dim", score.provider.dim, "Embedding dimension");
  cmd_score->add_option("--endpoint", score.provider.endpoint, "Embedding service base URL");
  cmd_score->add_option("--embedding-model", score.provider.model_name,
                        "Embedding model name");
  cmd_score->add_option("--cache", score.provider.cache,
                        "Embedding cache (precomputed: the vector file)");
  cmd_score->add_option("--in-flight", score.provider.max_in_flight,
                        "Concurrent remote embedding requests");
  cmd_score->add_option("--out", score.out, "Report path")->required();
  cmd_score->add_option("--instances-out", score.instances_out,
                        "Per-instance JSONL (default: <out>.instances.jsonl)");
  cmd_score->add_option("--format", score.format, "md | csv | json");
  cmd_score->add_option("--abbreviations", score.abbreviations,
                        "Abbreviation list for sentence splitting");
  cmd_score->add_option("--jobs", score.jobs, "Worker threads");

  CompareArgs compare;
  auto* cmd_compare = app.add_subcommand("compare", "Paired significance tests between two metrics");
  cmd_compare->add_option("--scores", compare.scores, "Per-instance scores JSONL")->required();
  cmd_compare->add_option("--metric-a", compare.metric_a, "First metric (default cec)");
  cmd_compare->add_option("--metric-b", compare.metric_b, "Second metric (default embf1)");
  cmd_compare->add_option("--n", compare.n, "Pairs to sample");
  cmd_compare->add_option("--seed", compare.seed, "Sampler seed");
  cmd_compare->add_option("--models", compare.model, "Restrict to one model's records");
  cmd_compare->add_option("--wilcoxon", compare.wilcoxon, "auto | exact | normal");
  cmd_compare->add_option("--out", compare.out, "Write JSON here instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitRuntime;
  }
  score.provider.dim_set = dim_opt->count() > 0;

  try {
    if (*cmd_validate) return run_validate(validate);
    if (*cmd_generate) return run_generate(generate);
    if (*cmd_score) return run_score(score);
    if (*cmd_compare) return run_compare(compare);
  } catch (const cec::Error& e) {
    std::cerr << "error (" << cec::to_string(e.code()) << "): " << e.what() << '\n';
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitRuntime;
}
