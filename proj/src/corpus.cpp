#include "cec/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <istream>
#include <numeric>
#include <unordered_set>

#include <json.hpp>

#include "cec/error.hpp"
#include "cec/hash.hpp"

namespace cec {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

bool is_blank(std::string_view s) {
  return std::all_of(s.begin(), s.end(), [](unsigned char c) {
    return std::isspace(c) != 0;
  });
}

struct LineContext {
  std::size_t line;
  std::string id;
};

[[noreturn]] void schema_violation(const LineContext& ctx, std::string field,
                                   const std::string& why) {
  throw CorpusError(ErrorCode::SchemaViolation,
                    "line " + std::to_string(ctx.line) + ": field '" + field +
                        "' " + why,
                    ctx.line, field, ctx.id);
}

Instance instance_from_json(const json& rec, LineContext& ctx) {
  if (!rec.is_object()) {
    schema_violation(ctx, "<record>", "record must be a JSON object");
  }
  Instance inst;

  auto id = rec.find("id");
  if (id == rec.end() || !id->is_string()) {
    schema_violation(ctx, "id", "must be a string");
  }
  inst.id = id->get<std::string>();
  if (inst.id.empty()) {
    schema_violation(ctx, "id", "must be nonempty");
  }
  ctx.id = inst.id;

  auto claim = rec.find("claim");
  if (claim == rec.end() || !claim->is_string()) {
    schema_violation(ctx, "claim", "must be a string");
  }
  inst.claim = claim->get<std::string>();

  auto evidence = rec.find("evidence");
  if (evidence == rec.end() || !evidence->is_array()) {
    schema_violation(ctx, "evidence", "must be an array of strings");
  }
  if (evidence->empty()) {
    schema_violation(ctx, "evidence", "must be nonempty");
  }
  if (evidence->size() > kEvidenceHardCap) {
    schema_violation(ctx, "evidence",
                     "has more than " + std::to_string(kEvidenceHardCap) +
                         " entries");
  }
  for (const auto& e : *evidence) {
    if (!e.is_string()) {
      schema_violation(ctx, "evidence", "must be an array of strings");
    }
    auto text = e.get<std::string>();
    if (is_blank(text)) {
      schema_violation(ctx, "evidence", "contains an empty entry");
    }
    inst.evidence.push_back(std::move(text));
  }

  auto label = rec.find("label");
  if (label == rec.end() || !label->is_string()) {
    schema_violation(ctx, "label", "must be a string");
  }
  auto parsed = parse_label(label->get<std::string>());
  if (!parsed) {
    schema_violation(ctx, "label",
                     "must be one of supported, refuted, not enough info");
  }
  inst.label = *parsed;

  auto ref = rec.find("reference_explanation");
  if (ref != rec.end() && !ref->is_null()) {
    if (!ref->is_string()) {
      schema_violation(ctx, "reference_explanation", "must be a string");
    }
    inst.reference_explanation = ref->get<std::string>();
  }

  auto gens = rec.find("generations");
  if (gens != rec.end() && !gens->is_null()) {
    if (!gens->is_object()) {
      schema_violation(ctx, "generations", "must be an object");
    }
    for (const auto& [model, text] : gens->items()) {
      if (!text.is_string()) {
        schema_violation(ctx, "generations", "value for '" + model +
                                                 "' must be a string");
      }
      inst.generations.emplace(model, text.get<std::string>());
    }
  }
  return inst;
}

}  // namespace

std::string_view to_string(Label label) noexcept {
  switch (label) {
    case Label::Supported: return "supported";
    case Label::Refuted: return "refuted";
    case Label::NotEnoughInfo: return "not enough info";
  }
  return "not enough info";
}

std::optional<Label> parse_label(std::string_view text) {
  std::string lower(text);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  if (lower == "supported") return Label::Supported;
  if (lower == "refuted") return Label::Refuted;
  if (lower == "not enough info") return Label::NotEnoughInfo;
  return std::nullopt;
}

bool Instance::has_generation(std::string_view model) const {
  return generations.find(std::string(model)) != generations.end();
}

bool ParseResult::has_errors() const {
  return std::any_of(findings.begin(), findings.end(), [](const Finding& f) {
    return f.severity == Severity::Error;
  });
}

ParseResult parse_corpus_lenient(std::istream& in, std::string source_path) {
  ParseResult result;
  result.corpus.source_path = std::move(source_path);
  std::unordered_set<std::string> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (is_blank(line)) continue;

    LineContext ctx{line_no, {}};
    json rec;
    try {
      rec = json::parse(line);
    } catch (const json::parse_error& e) {
      result.findings.push_back({Severity::Error, "MalformedLine", line_no, {},
                                 {}, std::string("invalid JSON: ") + e.what()});
      continue;
    }
    Instance inst;
    try {
      inst = instance_from_json(rec, ctx);
    } catch (const CorpusError& e) {
      result.findings.push_back({Severity::Error, "SchemaViolation", e.line(),
                                 e.field(), e.id(), e.what()});
      continue;
    }
    if (!seen.insert(inst.id).second) {
      result.findings.push_back({Severity::Error, "DuplicateId", line_no, "id",
                                 inst.id, "duplicate id '" + inst.id + "'"});
      continue;
    }
    if (inst.evidence.size() > kEvidenceSoftCap) {
      result.findings.push_back(
          {Severity::Warning, "EvidenceOverCap", line_no, "evidence", inst.id,
           std::to_string(inst.evidence.size()) + " evidence entries (cap " +
               std::to_string(kEvidenceSoftCap) + ")"});
    }
    result.corpus.instances.push_back(std::move(inst));
  }
  if (line_no == 0 || (result.corpus.instances.empty() && !result.has_errors())) {
    result.findings.push_back(
        {Severity::Warning, "EmptyCorpus", 0, {}, {}, "corpus has no records"});
  }
  return result;
}

Corpus parse_corpus(std::istream& in, std::string source_path,
                    std::vector<Finding>* warnings) {
  auto result = parse_corpus_lenient(in, std::move(source_path));
  for (const auto& f : result.findings) {
    if (f.severity == Severity::Warning) {
      if (warnings) warnings->push_back(f);
      continue;
    }
    ErrorCode code = f.code == "MalformedLine" ? ErrorCode::MalformedLine
                     : f.code == "DuplicateId" ? ErrorCode::DuplicateId
                                               : ErrorCode::SchemaViolation;
    throw CorpusError(code, f.message, f.line, f.field, f.id);
  }
  return std::move(result.corpus);
}

Corpus load_corpus(const std::filesystem::path& path,
                   std::vector<Finding>* warnings) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::Io, "cannot open corpus " + path.string());
  }
  return parse_corpus(in, path.string(), warnings);
}

std::string serialize_instance(const Instance& inst) {
  ordered_json rec;
  rec["id"] = inst.id;
  rec["claim"] = inst.claim;
  rec["evidence"] = inst.evidence;
  rec["label"] = std::string(to_string(inst.label));
  if (inst.reference_explanation) {
    rec["reference_explanation"] = *inst.reference_explanation;
  }
  if (!inst.generations.empty()) {
    ordered_json gens = ordered_json::object();
    for (const auto& [model, text] : inst.generations) gens[model] = text;
    rec["generations"] = std::move(gens);
  }
  return rec.dump();
}

std::string serialize_corpus(const Corpus& corpus) {
  std::string out;
  for (const auto& inst : corpus.instances) {
    out += serialize_instance(inst);
    out += '\n';
  }
  return out;
}

ValidationSummary validate_corpus(const Corpus& corpus, bool require_reference,
                                  std::span<const std::string> require_models) {
  ValidationSummary summary;
  summary.total = corpus.instances.size();
  summary.empty = corpus.instances.empty();
  for (const auto& model : require_models) {
    summary.missing_generation[model] = 0;
  }
  for (const auto& inst : corpus.instances) {
    if (require_reference && !inst.reference_explanation) {
      ++summary.missing_reference;
    }
    for (const auto& model : require_models) {
      if (!inst.has_generation(model)) ++summary.missing_generation[model];
    }
    if (inst.evidence.size() > kEvidenceSoftCap) ++summary.over_evidence_cap;
  }
  return summary;
}

std::vector<std::size_t> sample_indices(std::size_t population, std::size_t n,
                                        std::uint64_t seed) {
  if (n > population) {
    throw Error(ErrorCode::InsufficientInstances,
                "requested " + std::to_string(n) + " samples but only " +
                    std::to_string(population) + " are eligible");
  }
  std::vector<std::size_t> slots(population);
  std::iota(slots.begin(), slots.end(), std::size_t{0});
  SplitMix64 rng(seed);
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint64_t span = population - i;
    const auto j = i + static_cast<std::size_t>(rng.next() % span);
    std::swap(slots[i], slots[j]);
  }
  slots.resize(n);
  return slots;
}

bool is_eligible(const Instance& inst, std::optional<std::string_view> model) {
  if (!inst.reference_explanation) return false;
  return !model || inst.has_generation(*model);
}

std::vector<Instance> sample_pairs(const Corpus& corpus, std::size_t n,
                                   std::uint64_t seed,
                                   std::optional<std::string_view> model) {
  std::vector<const Instance*> eligible;
  for (const auto& inst : corpus.instances) {
    if (is_eligible(inst, model)) eligible.push_back(&inst);
  }
  std::vector<Instance> out;
  out.reserve(n);
  for (auto idx : sample_indices(eligible.size(), n, seed)) {
    out.push_back(*eligible[idx]);
  }
  return out;
}

}  // namespace cec
