#include "cec/report.hpp"

#include <cstdio>
#include <istream>
#include <sstream>

#include <json.hpp>

#include "cec/error.hpp"
#include "cec/hash.hpp"
#include "cec/parallel.hpp"

namespace cec {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::uint64_t run_digest(const Corpus& corpus, const ScoreOptions& opts,
                         const std::string& provider_id,
                         std::size_t n_instances) {
  std::ostringstream canon;
  canon << "provider=" << provider_id << ";models=";
  for (const auto& m : opts.models) canon << m << ',';
  canon << ";bleu=" << opts.bleu.max_order << ',' << opts.bleu.epsilon
        << ";meteor=" << opts.meteor.alpha << ',' << opts.meteor.beta << ','
        << opts.meteor.gamma << ',' << opts.meteor.node_budget
        << ";abbrev=" << hex16(opts.abbreviations->digest()) << ";corpus="
        << hex16(fnv1a64(serialize_corpus(corpus))) << ";n=" << n_instances;
  return fnv1a64(canon.str());
}

std::string markdown_table(const MetricReport& r, bool sd) {
  std::string out = "| Model |";
  for (auto m : kReportMetrics) {
    out += ' ';
    out += display_name(m);
    out += " |";
  }
  out += "\n|---|";
  for (std::size_t k = 0; k < kReportMetrics.size(); ++k) out += "---|";
  out += '\n';
  for (const auto& row : r.rows) {
    out += "| " + row.model + " |";
    for (std::size_t k = 0; k < kReportMetrics.size(); ++k) {
      out += ' ' + fixed(sd ? row.sd[k] : row.mean[k], 4) + " |";
    }
    out += '\n';
  }
  return out;
}

}  // namespace

std::string_view display_name(Metric m) noexcept {
  switch (m) {
    case Metric::Bleu: return "BLEU";
    case Metric::Rouge1: return "ROUGE-1";
    case Metric::Rouge2: return "ROUGE-2";
    case Metric::RougeL: return "ROUGE-L";
    case Metric::Meteor: return "METEOR";
    case Metric::EmbF1: return "EmbF1";
    case Metric::Cec: return "CEC";
  }
  return "";
}

std::string_view field_name(Metric m) noexcept {
  switch (m) {
    case Metric::Bleu: return "bleu";
    case Metric::Rouge1: return "rouge1";
    case Metric::Rouge2: return "rouge2";
    case Metric::RougeL: return "rougeL";
    case Metric::Meteor: return "meteor";
    case Metric::EmbF1: return "embf1";
    case Metric::Cec: return "cec_sym";
  }
  return "";
}

std::pair<double, double> metric_range(Metric m) noexcept {
  switch (m) {
    case Metric::EmbF1:
    case Metric::Cec:
      return {-1.0, 1.0};
    default:
      return {0.0, 1.0};
  }
}

double InstanceScore::value(Metric metric) const noexcept {
  switch (metric) {
    case Metric::Bleu: return baseline.bleu;
    case Metric::Rouge1: return baseline.rouge1;
    case Metric::Rouge2: return baseline.rouge2;
    case Metric::RougeL: return baseline.rougeL;
    case Metric::Meteor: return baseline.meteor;
    case Metric::EmbF1: return baseline.embf1;
    case Metric::Cec: return cec_sym;
  }
  return 0.0;
}

ScoreRun score_corpus(const Corpus& corpus, const ScoreOptions& opts,
                      Embedder& embedder) {
  if (opts.models.empty()) {
    throw Error(ErrorCode::InvalidArgument, "at least one model is required");
  }
  ScoreRun run;
  auto& report = run.report;
  report.provider_id = embedder.provider_id();

  std::vector<const Instance*> eligible;
  for (const auto& inst : corpus.instances) {
    bool ok = inst.reference_explanation.has_value();
    for (const auto& model : opts.models) ok = ok && inst.has_generation(model);
    if (ok) {
      eligible.push_back(&inst);
    } else {
      ++report.excluded_incomplete;
    }
  }
  if (eligible.empty()) {
    throw Error(ErrorCode::NoEligibleInstances,
                "no instance has a reference and every requested generation");
  }

  const std::size_t n_models = opts.models.size();
  std::vector<InstanceScore> scores(eligible.size() * n_models);
  parallel_for(eligible.size(), opts.jobs, [&](std::size_t k) {
    const Instance& inst = *eligible[k];
    const auto& ref_text = *inst.reference_explanation;
    const auto ref_sents = segment(ref_text, *opts.abbreviations, Origin::Reference);
    const auto ref_tokens = tokenize(ref_text);
    for (std::size_t mi = 0; mi < n_models; ++mi) {
      const auto& gen_text = inst.generations.at(opts.models[mi]);
      InstanceScore& s = scores[k * n_models + mi];
      s.id = inst.id;
      s.model = opts.models[mi];
      const auto gen_tokens = tokenize(gen_text);
      s.baseline.bleu = bleu(gen_tokens, ref_tokens, opts.bleu);
      s.baseline.rouge1 = rouge(gen_tokens, ref_tokens, RougeVariant::R1);
      s.baseline.rouge2 = rouge(gen_tokens, ref_tokens, RougeVariant::R2);
      s.baseline.rougeL = rouge(gen_tokens, ref_tokens, RougeVariant::RL);
      s.baseline.meteor = meteor(gen_tokens, ref_tokens, opts.meteor);
      s.baseline.embf1 = embf1(gen_tokens, ref_tokens, embedder);
      const auto gen_sents = segment(gen_text, *opts.abbreviations, Origin::Generated);
      if (gen_sents.empty() && ref_sents.empty()) {
        s.degenerate = true;
        continue;
      }
      const auto cec = cec_instance(gen_sents, ref_sents, embedder);
      s.cec_forward = cec.forward;
      s.cec_backward = cec.backward;
      s.cec_sym = cec.symmetric;
      s.n = cec.n;
      s.m = cec.m;
      s.degenerate = cec.degenerate;
    }
  });
  run.instances = scores;

  std::vector<std::size_t> kept;
  for (std::size_t k = 0; k < eligible.size(); ++k) {
    bool degenerate = false;
    for (std::size_t mi = 0; mi < n_models; ++mi) {
      degenerate = degenerate || scores[k * n_models + mi].degenerate;
    }
    if (degenerate) {
      ++report.skipped_degenerate;
    } else {
      kept.push_back(k);
    }
  }
  report.partial = report.skipped_degenerate > 0;
  if (kept.empty()) {
    throw Error(ErrorCode::NoEligibleInstances,
                "every eligible instance is degenerate for some model");
  }
  report.n_instances = kept.size();
  for (std::size_t mi = 0; mi < n_models; ++mi) {
    ModelRow row;
    row.model = opts.models[mi];
    for (std::size_t c = 0; c < kReportMetrics.size(); ++c) {
      std::vector<double> xs;
      xs.reserve(kept.size());
      for (auto k : kept) xs.push_back(scores[k * n_models + mi].value(kReportMetrics[c]));
      const auto d = descriptive(xs);
      row.mean[c] = d.mean;
      row.sd[c] = d.sd;
    }
    report.rows.push_back(std::move(row));
  }
  report.config_digest =
      run_digest(corpus, opts, report.provider_id, report.n_instances);
  return run;
}

std::optional<ReportFormat> parse_report_format(std::string_view text) {
  if (text == "md" || text == "markdown") return ReportFormat::Markdown;
  if (text == "csv") return ReportFormat::Csv;
  if (text == "json") return ReportFormat::Json;
  return std::nullopt;
}

namespace {

// Machine-readable column name: the JSONL field, with the symmetric CEC
// score shortened to "cec".
std::string_view column_key(Metric m) noexcept {
  return m == Metric::Cec ? "cec" : field_name(m);
}

}  // namespace

std::string render_report(const MetricReport& r, ReportFormat format) {
  switch (format) {
    case ReportFormat::Markdown: {
      std::string out = "# Explanation quality by model\n\n";
      out += "Corpus means over " + std::to_string(r.n_instances) + " instances.\n\n";
      out += markdown_table(r, false);
      out += "\nStandard deviations (n - 1):\n\n";
      out += markdown_table(r, true);
      out += "\n- provider: " + r.provider_id + "\n";
      out += "- config digest: " + hex16(r.config_digest) + "\n";
      out += "- skipped (degenerate): " + std::to_string(r.skipped_degenerate) + "\n";
      out += "- excluded (incomplete): " + std::to_string(r.excluded_incomplete) + "\n";
      if (r.partial) out += "- partial report: some instances were skipped\n";
      return out;
    }
    case ReportFormat::Csv: {
      std::string out = "model,n";
      for (auto m : kReportMetrics) {
        out += ',';
        out += column_key(m);
        out += ',';
        out += column_key(m);
        out += "_sd";
      }
      out += ",provider_id,config_digest\n";
      for (const auto& row : r.rows) {
        out += row.model + ',' + std::to_string(r.n_instances);
        for (std::size_t c = 0; c < kReportMetrics.size(); ++c) {
          out += ',' + fixed(row.mean[c], 6) + ',' + fixed(row.sd[c], 6);
        }
        out += ',' + r.provider_id + ',' + hex16(r.config_digest) + '\n';
      }
      return out;
    }
    case ReportFormat::Json: {
      ordered_json j;
      j["provider_id"] = r.provider_id;
      j["config_digest"] = hex16(r.config_digest);
      j["n_instances"] = r.n_instances;
      j["skipped_degenerate"] = r.skipped_degenerate;
      j["excluded_incomplete"] = r.excluded_incomplete;
      j["partial"] = r.partial;
      j["rows"] = ordered_json::array();
      for (const auto& row : r.rows) {
        ordered_json jr;
        jr["model"] = row.model;
        ordered_json mean, sd;
        for (std::size_t c = 0; c < kReportMetrics.size(); ++c) {
          const std::string key(column_key(kReportMetrics[c]));
          mean[key] = row.mean[c];
          sd[key] = row.sd[c];
        }
        jr["mean"] = std::move(mean);
        jr["sd"] = std::move(sd);
        j["rows"].push_back(std::move(jr));
      }
      return j.dump(2) + "\n";
    }
  }
  return {};
}

std::string instance_scores_jsonl(const std::vector<InstanceScore>& scores) {
  std::string out;
  for (const auto& s : scores) {
    ordered_json j;
    j["id"] = s.id;
    j["model"] = s.model;
    j["cec_forward"] = s.cec_forward;
    j["cec_backward"] = s.cec_backward;
    j["cec_sym"] = s.cec_sym;
    j["n"] = s.n;
    j["m"] = s.m;
    j["degenerate"] = s.degenerate;
    j["bleu"] = s.baseline.bleu;
    j["rouge1"] = s.baseline.rouge1;
    j["rouge2"] = s.baseline.rouge2;
    j["rougeL"] = s.baseline.rougeL;
    j["meteor"] = s.baseline.meteor;
    j["embf1"] = s.baseline.embf1;
    out += j.dump();
    out += '\n';
  }
  return out;
}

std::optional<double> ScoreRecord::get(std::string_view field) const {
  for (const auto& [k, v] : values) {
    if (k == field) return v;
  }
  return std::nullopt;
}

std::vector<ScoreRecord> parse_instance_scores(std::istream& in) {
  std::vector<ScoreRecord> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw CorpusError(ErrorCode::MalformedLine,
                        "scores line " + std::to_string(line_no) + ": " + e.what(),
                        line_no);
    }
    if (!j.is_object() || !j.contains("id") || !j["id"].is_string()) {
      throw CorpusError(ErrorCode::SchemaViolation,
                        "scores line " + std::to_string(line_no) +
                            ": missing string field 'id'",
                        line_no, "id");
    }
    ScoreRecord rec;
    rec.id = j["id"].get<std::string>();
    if (j.contains("model") && j["model"].is_string()) {
      rec.model = j["model"].get<std::string>();
    }
    if (j.contains("degenerate") && j["degenerate"].is_boolean()) {
      rec.degenerate = j["degenerate"].get<bool>();
    }
    for (const auto& [key, value] : j.items()) {
      if (value.is_number() && key != "n" && key != "m") {
        rec.values.emplace_back(key, value.get<double>());
      }
    }
    out.push_back(std::move(rec));
  }
  return out;
}

std::optional<MetricRef> resolve_metric(std::string_view name) {
  if (name == "cec" || name == "cec_sym") return MetricRef{"cec_sym", "CEC"};
  if (name == "cec_forward") return MetricRef{"cec_forward", "CECforward"};
  if (name == "cec_backward") return MetricRef{"cec_backward", "CECbackward"};
  for (auto m : kReportMetrics) {
    if (name == field_name(m)) {
      return MetricRef{std::string(field_name(m)), std::string(display_name(m))};
    }
  }
  return std::nullopt;
}

ComparisonSummary compare_scores(const std::vector<ScoreRecord>& records,
                                 const CompareOptions& opts) {
  const auto a = resolve_metric(opts.metric_a);
  const auto b = resolve_metric(opts.metric_b);
  if (!a || !b) {
    throw Error(ErrorCode::InvalidArgument,
                "unknown metric '" + (a ? opts.metric_b : opts.metric_a) + "'");
  }
  std::vector<const ScoreRecord*> eligible;
  for (const auto& rec : records) {
    if (rec.degenerate) continue;
    if (opts.model && rec.model != *opts.model) continue;
    if (!rec.get(a->field) || !rec.get(b->field)) continue;
    eligible.push_back(&rec);
  }
  ComparisonSummary out;
  out.comparison = a->label + "_vs_" + b->label;
  out.metric_a = a->field;
  out.metric_b = b->field;
  out.seed = opts.seed;
  PairedSample sample;
  sample.labels = {a->label, b->label};
  for (auto idx : sample_indices(eligible.size(), opts.n, opts.seed)) {
    const auto& rec = *eligible[idx];
    out.sampled_ids.push_back(rec.model.empty() ? rec.id : rec.id + "@" + rec.model);
    sample.a.push_back(*rec.get(a->field));
    sample.b.push_back(*rec.get(b->field));
  }
  out.result = paired_comparison(sample, opts.wilcoxon);
  return out;
}

std::string comparison_json(const ComparisonSummary& s) {
  const auto& r = s.result;
  ordered_json j;
  j["comparison"] = s.comparison;
  j["metric_a"] = s.metric_a;
  j["metric_b"] = s.metric_b;
  j["n"] = r.n;
  j["seed"] = s.seed;
  j["t"] = r.t_stat;
  j["df"] = r.df;
  j["p_t"] = r.p_t;
  j["w"] = r.w_stat;
  j["p_w"] = r.p_w;
  j["wilcoxon_exact"] = r.wilcoxon_exact;
  j["d_pooled"] = r.d_pooled;
  j["d_z"] = r.d_z;
  j["mean_a"] = r.mean_a;
  j["sd_a"] = r.sd_a;
  j["mean_b"] = r.mean_b;
  j["sd_b"] = r.sd_b;
  j["sampled_ids"] = s.sampled_ids;
  return j.dump(2) + "\n";
}

}  // namespace cec
