#include <doctest.h>

#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cec/error.hpp"
#include "cec/hash.hpp"
#include "cec/report.hpp"
#include "oracles/reference.hpp"

using namespace cec;
using nlohmann::json;

namespace {

const std::filesystem::path kFixtures = CEC_FIXTURE_DIR;

Corpus fixture() { return load_corpus(kFixtures / "fixture_corpus.jsonl"); }

ScoreOptions three_models() {
  ScoreOptions o;
  o.models = {"phi-2", "tinyllama-1.1b", "gemma-2b"};
  return o;
}

std::vector<ScoreRecord> compare_records() {
  std::ifstream in(kFixtures / "compare_scores.jsonl");
  return parse_instance_scores(in);
}

std::string column_key(Metric m) {
  return m == Metric::Cec ? "cec" : std::string(field_name(m));
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) out.push_back(cur);
  return out;
}

}  // namespace

TEST_CASE("identity corpus scores 1 everywhere except METEOR") {
  auto c = fixture();
  for (auto& inst : c.instances) {
    for (auto& [model, text] : inst.generations) text = *inst.reference_explanation;
  }
  Embedder e(ProviderConfig::hashed_bow());
  auto run = score_corpus(c, three_models(), e);
  REQUIRE(run.report.rows.size() == 3);
  CHECK(run.report.n_instances == 20);
  for (const auto& row : run.report.rows) {
    for (std::size_t k = 0; k < kReportMetrics.size(); ++k) {
      if (kReportMetrics[k] == Metric::Meteor) {
        CHECK(row.mean[k] > 0.9);
      } else {
        CHECK(row.mean[k] == doctest::Approx(1.0).epsilon(1e-9));
      }
    }
  }
}

TEST_CASE("markdown report layout") {
  Embedder e(ProviderConfig::hashed_bow());
  auto run = score_corpus(fixture(), three_models(), e);
  const auto md = render_report(run.report, ReportFormat::Markdown);
  CHECK(md.find("| Model | BLEU | ROUGE-1 | ROUGE-2 | ROUGE-L | METEOR | EmbF1 | CEC |") !=
        std::string::npos);
  CHECK(md.find("| phi-2 |") != std::string::npos);
  CHECK(md.find("| gemma-2b |") != std::string::npos);
  CHECK(md.find(hex16(run.report.config_digest)) != std::string::npos);
  CHECK(md.find("hashed-bow:256") != std::string::npos);
}

TEST_CASE("every emitted cell parses back within its metric's range") {
  Embedder e(ProviderConfig::hashed_bow());
  auto run = score_corpus(fixture(), three_models(), e);
  const auto csv = render_report(run.report, ReportFormat::Csv);
  auto lines = split(csv, '\n');
  REQUIRE(lines.size() >= 4);
  auto header = split(lines[0], ',');
  CHECK(header[0] == "model");
  std::size_t cells = 0;
  for (std::size_t li = 1; li < lines.size(); ++li) {
    if (lines[li].empty()) continue;
    auto cols = split(lines[li], ',');
    REQUIRE(cols.size() == header.size());
    for (std::size_t ci = 1; ci < cols.size(); ++ci) {
      const auto name = header[ci];
      for (auto m : kReportMetrics) {
        if (name == column_key(m) || name == column_key(m) + "_sd") {
          const double v = std::stod(cols[ci]);
          auto [lo, hi] = metric_range(m);
          CHECK(v >= lo);
          CHECK(v <= hi);
          ++cells;
        }
      }
    }
  }
  CHECK(cells >= 21);

  auto j = json::parse(render_report(run.report, ReportFormat::Json));
  CHECK(j["n_instances"] == 20);
  CHECK(j["rows"].size() == 3);
  for (const auto& row : j["rows"]) {
    for (auto m : kReportMetrics) {
      const double v = row["mean"][column_key(m)].get<double>();
      auto [lo, hi] = metric_range(m);
      CHECK(v >= lo);
      CHECK(v <= hi);
    }
  }
}

TEST_CASE("rows agree with per-instance scores and with the CEC module") {
  auto c = fixture();
  Embedder e(ProviderConfig::hashed_bow());
  const auto opts = three_models();
  auto run = score_corpus(c, opts, e);
  CHECK(run.instances.size() == 60);
  for (std::size_t mi = 0; mi < 3; ++mi) {
    const auto& model = opts.models[mi];
    std::vector<double> cec_vals, bleu_vals;
    for (const auto& s : run.instances) {
      if (s.model != model) continue;
      cec_vals.push_back(s.cec_sym);
      bleu_vals.push_back(s.baseline.bleu);
    }
    const auto& row = run.report.rows[mi];
    CHECK(row.model == model);
    CHECK(row.mean[6] == doctest::Approx(oracle::mean(cec_vals)).epsilon(1e-12));
    CHECK(row.sd[6] == doctest::Approx(oracle::sd(cec_vals)).epsilon(1e-12));
    CHECK(row.mean[0] == doctest::Approx(oracle::mean(bleu_vals)).epsilon(1e-12));
    auto agg = cec_corpus(c, model, e);
    CHECK(row.mean[6] == doctest::Approx(agg.mean).epsilon(1e-12));
  }
}

TEST_CASE("report is deterministic across runs and job counts") {
  auto c = fixture();
  auto opts = three_models();
  Embedder e1(ProviderConfig::hashed_bow());
  Embedder e2(ProviderConfig::hashed_bow());
  auto r1 = score_corpus(c, opts, e1);
  opts.jobs = 6;
  auto r2 = score_corpus(c, opts, e2);
  for (auto f : {ReportFormat::Markdown, ReportFormat::Csv, ReportFormat::Json}) {
    CHECK(render_report(r1.report, f) == render_report(r2.report, f));
  }
  CHECK(instance_scores_jsonl(r1.instances) == instance_scores_jsonl(r2.instances));
}

TEST_CASE("config digest changes with the configuration") {
  auto c = fixture();
  Embedder e256(ProviderConfig::hashed_bow());
  Embedder e64(ProviderConfig::hashed_bow(64));
  auto a = score_corpus(c, three_models(), e256).report.config_digest;
  auto b = score_corpus(c, three_models(), e64).report.config_digest;
  auto opts = three_models();
  opts.models.pop_back();
  auto d = score_corpus(c, opts, e256).report.config_digest;
  CHECK(a != b);
  CHECK(a != d);
}

TEST_CASE("degenerate and incomplete instances are excluded from every row") {
  auto c = fixture();
  c.instances[0].generations["phi-2"] = "";
  c.instances[1].generations.erase("gemma-2b");
  Embedder e(ProviderConfig::hashed_bow());
  auto run = score_corpus(c, three_models(), e);
  CHECK(run.report.n_instances == 18);
  CHECK(run.report.skipped_degenerate == 1);
  CHECK(run.report.excluded_incomplete == 1);
  CHECK(run.report.partial);
  const auto md = render_report(run.report, ReportFormat::Markdown);
  CHECK(md.find("partial") != std::string::npos);
}

TEST_CASE("per-instance JSONL envelope round-trips") {
  Embedder e(ProviderConfig::hashed_bow());
  auto run = score_corpus(fixture(), three_models(), e);
  const auto text = instance_scores_jsonl(run.instances);
  std::istringstream in(text);
  std::string first;
  std::getline(in, first);
  auto j = json::parse(first);
  for (const char* key : {"id", "model", "cec_forward", "cec_backward", "cec_sym", "n", "m",
                          "degenerate", "bleu", "rouge1", "rouge2", "rougeL", "meteor",
                          "embf1"}) {
    CHECK(j.contains(key));
  }
  std::istringstream again(text);
  auto recs = parse_instance_scores(again);
  REQUIRE(recs.size() == run.instances.size());
  CHECK(recs[0].id == run.instances[0].id);
  CHECK(*recs[0].get("cec_sym") == run.instances[0].cec_sym);
  CHECK(*recs[5].get("meteor") == run.instances[5].baseline.meteor);
}

TEST_CASE("malformed score files are rejected") {
  std::istringstream bad("{\"id\":1}\n");
  CHECK_THROWS_AS(parse_instance_scores(bad), CorpusError);
  std::istringstream garbage("not json\n");
  CHECK_THROWS_AS(parse_instance_scores(garbage), CorpusError);
}

TEST_CASE("metric names") {
  CHECK(resolve_metric("cec")->field == "cec_sym");
  CHECK(resolve_metric("embf1")->label == "EmbF1");
  CHECK(resolve_metric("rougeL")->field == "rougeL");
  CHECK(resolve_metric("cec_forward")->field == "cec_forward");
  CHECK_FALSE(resolve_metric("bertscore"));
}

TEST_CASE("compare on the synthetic score file reproduces the t-test fixture") {
  CompareOptions o;
  o.n = 3;
  o.seed = 5;
  auto s = compare_scores(compare_records(), o);
  CHECK(s.comparison == "CEC_vs_EmbF1");
  CHECK(s.sampled_ids.size() == 3);
  CHECK(std::fabs(s.result.t_stat - 3.4641) <= 1e-4);
  CHECK(std::fabs(s.result.p_t - 0.0742) <= 1e-3);
  CHECK(s.result.df == 2);
  CHECK(s.result.w_stat == 0.0);
  auto j = json::parse(comparison_json(s));
  for (const char* key : {"comparison", "n", "t", "df", "p_t", "w", "p_w", "d_pooled", "d_z"}) {
    CHECK(j.contains(key));
  }
  CHECK(j["n"] == 3);
}

TEST_CASE("compare errors") {
  CompareOptions o;
  o.n = 4;  // one of the four records is degenerate
  try {
    compare_scores(compare_records(), o);
    FAIL("expected InsufficientInstances");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InsufficientInstances);
  }
  o.n = 3;
  o.metric_b = "cec";
  try {
    compare_scores(compare_records(), o);
    FAIL("expected ZeroVariance");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ZeroVariance);
  }
  o.metric_b = "nope";
  CHECK_THROWS_AS(compare_scores(compare_records(), o), Error);
}

TEST_CASE("compare sampling is seeded") {
  auto c = fixture();
  Embedder e(ProviderConfig::hashed_bow());
  auto run = score_corpus(c, three_models(), e);
  std::istringstream in(instance_scores_jsonl(run.instances));
  auto recs = parse_instance_scores(in);
  CompareOptions o;
  o.n = 20;
  o.model = "gemma-2b";
  auto a = compare_scores(recs, o);
  auto b = compare_scores(recs, o);
  o.seed = 1;
  auto d = compare_scores(recs, o);
  CHECK(a.sampled_ids == b.sampled_ids);
  CHECK(a.sampled_ids != d.sampled_ids);
  CHECK(a.result.t_stat == doctest::Approx(d.result.t_stat));
}
