#pragma once

#include <cstdint>
#include <filesystem>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace cec {

enum class Origin { Generated, Reference };

/// Sentences of one explanation, in text order. No entry is empty after
/// trimming.
struct SentenceSet {
  std::vector<std::string> sentences;
  Origin origin = Origin::Generated;

  std::size_t size() const noexcept { return sentences.size(); }
  bool empty() const noexcept { return sentences.empty(); }
  bool operator==(const SentenceSet&) const = default;
};

/// Lowercase word tokens; none is empty or contains whitespace.
struct TokenSequence {
  std::vector<std::string> tokens;

  std::size_t size() const noexcept { return tokens.size(); }
  bool empty() const noexcept { return tokens.empty(); }
  bool operator==(const TokenSequence&) const = default;
};

/// Tokens ending in '.' that do not close a sentence ("Dr.", "e.g.").
/// File format: one token per line, UTF-8; '#' starts a comment line; a
/// "# version: N" comment sets the version.
class AbbreviationList {
 public:
  AbbreviationList() = default;
  explicit AbbreviationList(std::vector<std::string> entries, int version = 1);

  /// The list compiled into the library; identical to data/abbreviations.txt.
  static const AbbreviationList& builtin();
  static AbbreviationList parse(std::string_view text);
  static AbbreviationList load(const std::filesystem::path& path);

  /// Case-insensitive lookup of a token including its trailing '.'.
  bool contains(std::string_view token) const;
  int version() const noexcept { return version_; }
  std::size_t size() const noexcept { return entries_.size(); }
  /// FNV-1a over the sorted, lowercased entries; identifies the list in run
  /// configuration digests.
  std::uint64_t digest() const;

 private:
  std::set<std::string, std::less<>> entries_;
  int version_ = 1;
};

/// Rule-based sentence splitter. A sentence ends at a run of '.', '!' or '?'
/// (plus any closing quotes or brackets) that is followed by whitespace and
/// then an uppercase letter, or by end of input. A lone '.' ending a listed
/// abbreviation never ends a sentence; "3.5" never splits because no
/// whitespace follows the point.
SentenceSet segment(std::string_view text,
                    const AbbreviationList& abbreviations =
                        AbbreviationList::builtin(),
                    Origin origin = Origin::Generated);

/// Splits on non-alphanumeric code points and lowercases. Letters and digits
/// of ASCII, Latin-1, Latin Extended-A/B, Greek and Cyrillic are classified
/// by table; other scripts (CJK, Arabic, ...) count as word characters and
/// general punctuation and symbol blocks as separators. Invalid UTF-8 bytes
/// are separators.
TokenSequence tokenize(std::string_view text);

}  // namespace cec
