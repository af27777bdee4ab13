#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace cec {

enum class Label { Supported, Refuted, NotEnoughInfo };

/// Canonical lowercase wire form: "supported", "refuted", "not enough info".
std::string_view to_string(Label label) noexcept;
/// Case-insensitive parse of the wire form.
std::optional<Label> parse_label(std::string_view text);

/// One claim with its evidence, veracity label, the teacher's reference
/// explanation (absent until generated) and per-model generations.
struct Instance {
  std::string id;
  std::string claim;
  std::vector<std::string> evidence;
  Label label = Label::NotEnoughInfo;
  std::optional<std::string> reference_explanation;
  std::map<std::string, std::string> generations;

  bool operator==(const Instance&) const = default;

  bool has_generation(std::string_view model) const;
};

inline constexpr int kSchemaVersion = 1;
/// Evidence lists longer than this load with a warning.
inline constexpr std::size_t kEvidenceSoftCap = 5;
/// Evidence lists longer than this are rejected.
inline constexpr std::size_t kEvidenceHardCap = 10;

struct Corpus {
  std::vector<Instance> instances;
  std::string source_path;
  int schema_version = kSchemaVersion;

  /// Equality compares content only; source_path is ignored.
  bool operator==(const Corpus& other) const {
    return instances == other.instances &&
           schema_version == other.schema_version;
  }
};

enum class Severity { Warning, Error };

/// A problem found while reading a corpus. `line` is 1-based; 0 means the
/// finding concerns the corpus as a whole.
struct Finding {
  Severity severity = Severity::Error;
  std::string code;
  std::size_t line = 0;
  std::string field;
  std::string id;
  std::string message;

  bool operator==(const Finding&) const = default;
};

struct ParseResult {
  Corpus corpus;  // only the records that parsed cleanly
  std::vector<Finding> findings;

  bool has_errors() const;
};

/// Parses every line, collecting all findings instead of stopping at the first.
ParseResult parse_corpus_lenient(std::istream& in, std::string source_path = {});

/// Strict load: throws CorpusError (MalformedLine, SchemaViolation,
/// DuplicateId) on the first error. Warnings go to `warnings` if given.
Corpus parse_corpus(std::istream& in, std::string source_path = {},
                    std::vector<Finding>* warnings = nullptr);
Corpus load_corpus(const std::filesystem::path& path,
                   std::vector<Finding>* warnings = nullptr);

/// One compact JSON object, no trailing newline.
std::string serialize_instance(const Instance& inst);
/// JSONL, one record per line, each terminated by '\n'.
std::string serialize_corpus(const Corpus& corpus);

struct ValidationSummary {
  std::size_t total = 0;
  std::size_t missing_reference = 0;
  std::map<std::string, std::size_t> missing_generation;
  std::size_t over_evidence_cap = 0;
  bool empty = false;

  bool operator==(const ValidationSummary&) const = default;
};

ValidationSummary validate_corpus(const Corpus& corpus, bool require_reference,
                                  std::span<const std::string> require_models);

/// Draws `n` distinct indices from [0, population) by a partial Fisher-Yates
/// shuffle driven by SplitMix64(seed): for i in [0, n), swap slot i with slot
/// i + next() % (population - i). Throws InsufficientInstances if
/// n > population.
std::vector<std::size_t> sample_indices(std::size_t population, std::size_t n,
                                        std::uint64_t seed);

/// True when the instance can be scored for `model`: it has a reference and,
/// if a model is given, a generation for it.
bool is_eligible(const Instance& inst, std::optional<std::string_view> model);

/// Samples `n` instances among the eligible ones, in the order the sampler
/// draws them. The eligible set is the instances of `corpus` (in corpus
/// order) that pass is_eligible(model).
std::vector<Instance> sample_pairs(const Corpus& corpus, std::size_t n,
                                   std::uint64_t seed,
                                   std::optional<std::string_view> model = {});

}  // namespace cec
