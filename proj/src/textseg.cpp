#include "cec/textseg.hpp"

#include <algorithm>
#include <sstream>

#include "cec/error.hpp"
#include "cec/fileio.hpp"
#include "cec/hash.hpp"

namespace cec {

namespace {

constexpr char32_t kInvalid = 0xFFFD;

struct Decoded {
  char32_t cp;
  std::size_t len;
};

// Decodes one UTF-8 sequence at `pos`; malformed input yields U+FFFD over a
// single byte so callers always make progress.
Decoded decode_utf8(std::string_view s, std::size_t pos) {
  const auto b0 = static_cast<unsigned char>(s[pos]);
  if (b0 < 0x80) return {b0, 1};
  std::size_t len = 0;
  char32_t cp = 0;
  char32_t min = 0;
  if ((b0 & 0xE0) == 0xC0) {
    len = 2; cp = b0 & 0x1F; min = 0x80;
  } else if ((b0 & 0xF0) == 0xE0) {
    len = 3; cp = b0 & 0x0F; min = 0x800;
  } else if ((b0 & 0xF8) == 0xF0) {
    len = 4; cp = b0 & 0x07; min = 0x10000;
  } else {
    return {kInvalid, 1};
  }
  if (pos + len > s.size()) return {kInvalid, 1};
  for (std::size_t k = 1; k < len; ++k) {
    const auto b = static_cast<unsigned char>(s[pos + k]);
    if ((b & 0xC0) != 0x80) return {kInvalid, 1};
    cp = (cp << 6) | (b & 0x3F);
  }
  if (cp < min || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) {
    return {kInvalid, 1};
  }
  return {cp, len};
}

void append_utf8(std::string& out, char32_t cp) {
  if (cp < 0x80) {
    out += static_cast<char>(cp);
  } else if (cp < 0x800) {
    out += static_cast<char>(0xC0 | (cp >> 6));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else if (cp < 0x10000) {
    out += static_cast<char>(0xE0 | (cp >> 12));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else {
    out += static_cast<char>(0xF0 | (cp >> 18));
    out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  }
}

bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' ||
         c == '\f';
}

// Latin Extended-A alternates upper/lower in three runs, with U+0178 (Ÿ)
// mapping back into Latin-1.
bool latin_ext_a_upper(char32_t cp) {
  if (cp >= 0x0100 && cp <= 0x0137) return cp % 2 == 0;
  if (cp >= 0x0139 && cp <= 0x0148) return cp % 2 == 1;
  if (cp >= 0x014A && cp <= 0x0177) return cp % 2 == 0;
  if (cp == 0x0178) return true;
  if (cp >= 0x0179 && cp <= 0x017E) return cp % 2 == 1;
  return false;
}

bool is_upper(char32_t cp) {
  if (cp >= 'A' && cp <= 'Z') return true;
  if (cp >= 0x00C0 && cp <= 0x00DE && cp != 0x00D7) return true;
  if (latin_ext_a_upper(cp)) return true;
  if (cp >= 0x0391 && cp <= 0x03A9 && cp != 0x03A2) return true;
  if (cp >= 0x0400 && cp <= 0x042F) return true;
  return false;
}

char32_t to_lower(char32_t cp) {
  if (cp >= 'A' && cp <= 'Z') return cp + 0x20;
  if (cp >= 0x00C0 && cp <= 0x00DE && cp != 0x00D7) return cp + 0x20;
  if (latin_ext_a_upper(cp)) return cp == 0x0178 ? 0x00FF : cp + 1;
  if (cp >= 0x0391 && cp <= 0x03A9 && cp != 0x03A2) return cp + 0x20;
  if (cp >= 0x0410 && cp <= 0x042F) return cp + 0x20;
  if (cp >= 0x0400 && cp <= 0x040F) return cp + 0x50;
  return cp;
}

bool is_word_char(char32_t cp) {
  if (cp < 0x80) {
    return (cp >= '0' && cp <= '9') || (cp >= 'a' && cp <= 'z') ||
           (cp >= 'A' && cp <= 'Z');
  }
  if (cp == 0x00AA || cp == 0x00B5 || cp == 0x00BA) return true;
  if (cp < 0x00C0) return false;  // C1 controls, Latin-1 punctuation
  if (cp == 0x00D7 || cp == 0x00F7) return false;
  if (cp <= 0x024F) return true;  // Latin-1 letters, Latin Extended-A/B
  if (cp == 0x037E || cp == 0x0387) return false;  // Greek punctuation
  if (cp >= 0x2000 && cp <= 0x2BFF) return false;  // punctuation, symbols
  if (cp >= 0x2E00 && cp <= 0x2E7F) return false;
  if (cp >= 0x3000 && cp <= 0x303F) return false;  // CJK punctuation
  if (cp >= 0xFE30 && cp <= 0xFE4F) return false;
  if ((cp >= 0xFF01 && cp <= 0xFF0F) || (cp >= 0xFF1A && cp <= 0xFF20) ||
      (cp >= 0xFF3B && cp <= 0xFF40) || (cp >= 0xFF5B && cp <= 0xFF65)) {
    return false;
  }
  if (cp == kInvalid) return false;
  if (cp >= 0x1F000) return false;  // emoji and pictographs
  return true;
}

bool is_terminal(char c) { return c == '.' || c == '!' || c == '?'; }

bool is_closer(char c) {
  return c == '"' || c == '\'' || c == ')' || c == ']' || c == '}';
}

bool is_opener(char c) {
  return c == '"' || c == '\'' || c == '(' || c == '[' || c == '{';
}

// Length of a closing curly quote (’ U+2019, ” U+201D) at pos, else 0.
std::size_t curly_closer_len(std::string_view s, std::size_t pos) {
  if (pos + 3 <= s.size() && s[pos] == '\xE2' && s[pos + 1] == '\x80' &&
      (s[pos + 2] == '\x99' || s[pos + 2] == '\x9D')) {
    return 3;
  }
  return 0;
}

// Length of an opening curly quote (‘ U+2018, “ U+201C) at pos, else 0.
std::size_t curly_opener_len(std::string_view s, std::size_t pos) {
  if (pos + 3 <= s.size() && s[pos] == '\xE2' && s[pos + 1] == '\x80' &&
      (s[pos + 2] == '\x98' || s[pos + 2] == '\x9C')) {
    return 3;
  }
  return 0;
}

std::string_view trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && is_space(s[b])) ++b;
  while (e > b && is_space(s[e - 1])) --e;
  return s.substr(b, e - b);
}

std::string lowercase_ascii(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) {
    return (c >= 'A' && c <= 'Z') ? static_cast<char>(c + 0x20)
                                  : static_cast<char>(c);
  });
  return out;
}

// The whitespace-delimited word ending at `dot` (inclusive), with leading
// opening punctuation removed.
std::string_view word_ending_at(std::string_view text, std::size_t dot) {
  std::size_t b = dot;
  while (b > 0 && !is_space(text[b - 1])) --b;
  while (b < dot && is_opener(text[b])) ++b;
  return text.substr(b, dot - b + 1);
}

constexpr std::string_view kBuiltinList[] = {
    "dr.",   "mr.",    "mrs.", "ms.",   "prof.", "sr.",   "jr.",   "st.",
    "mt.",   "e.g.",   "i.e.", "etc.",  "vs.",   "cf.",   "al.",   "fig.",
    "figs.", "eq.",    "eqs.", "no.",   "nos.",  "vol.",  "approx.", "ca.",
    "inc.",  "ltd.",   "co.",  "corp.", "dept.", "univ.", "u.s.",  "u.k.",
    "u.n.",  "a.m.",   "p.m.", "jan.",  "feb.",  "mar.",  "apr.",  "jun.",
    "jul.",  "aug.",   "sep.", "sept.", "oct.",  "nov.",  "dec.",
};

}  // namespace

AbbreviationList::AbbreviationList(std::vector<std::string> entries,
                                   int version)
    : version_(version) {
  for (auto& e : entries) entries_.insert(lowercase_ascii(e));
}

const AbbreviationList& AbbreviationList::builtin() {
  static const AbbreviationList list(
      std::vector<std::string>(std::begin(kBuiltinList), std::end(kBuiltinList)),
      1);
  return list;
}

AbbreviationList AbbreviationList::parse(std::string_view text) {
  std::vector<std::string> entries;
  int version = 1;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    auto t = trim(line);
    if (t.empty()) continue;
    if (t.front() == '#') {
      constexpr std::string_view kTag = "version:";
      auto body = trim(t.substr(1));
      if (body.substr(0, kTag.size()) == kTag) {
        try {
          version = std::stoi(std::string(trim(body.substr(kTag.size()))));
        } catch (const std::exception&) {
          throw Error(ErrorCode::InvalidArgument,
                      "bad abbreviation list version line: " + line);
        }
      }
      continue;
    }
    entries.emplace_back(t);
  }
  return AbbreviationList(std::move(entries), version);
}

AbbreviationList AbbreviationList::load(const std::filesystem::path& path) {
  return parse(read_file(path));
}

bool AbbreviationList::contains(std::string_view token) const {
  return entries_.find(lowercase_ascii(token)) != entries_.end();
}

std::uint64_t AbbreviationList::digest() const {
  std::uint64_t h = kFnvOffsetBasis;
  for (const auto& e : entries_) {
    h = fnv1a64(e, h);
    h = fnv1a64("\n", h);
  }
  return h;
}

SentenceSet segment(std::string_view text,
                    const AbbreviationList& abbreviations, Origin origin) {
  SentenceSet out;
  out.origin = origin;
  const std::size_t n = text.size();
  std::size_t start = 0;
  std::size_t i = 0;

  auto emit = [&](std::size_t end) {
    auto s = trim(text.substr(start, end - start));
    if (!s.empty()) out.sentences.emplace_back(s);
    start = end;
  };

  while (i < n) {
    if (!is_terminal(text[i])) {
      ++i;
      continue;
    }
    const std::size_t run_begin = i;
    std::size_t j = i;
    while (j < n && is_terminal(text[j])) ++j;
    const bool lone_dot = (j - run_begin == 1) && text[run_begin] == '.';
    for (;;) {
      if (j < n && is_closer(text[j])) {
        ++j;
      } else if (auto len = curly_closer_len(text, j)) {
        j += len;
      } else {
        break;
      }
    }
    if (j < n && !is_space(text[j])) {
      i = j;
      continue;
    }
    std::size_t k = j;
    while (k < n && is_space(text[k])) ++k;
    bool boundary = false;
    if (k == n) {
      boundary = true;
    } else {
      for (;;) {
        if (k < n && is_opener(text[k])) {
          ++k;
        } else if (auto len = curly_opener_len(text, k)) {
          k += len;
        } else {
          break;
        }
      }
      boundary = k < n && is_upper(decode_utf8(text, k).cp);
    }
    if (boundary && lone_dot &&
        abbreviations.contains(word_ending_at(text, run_begin))) {
      boundary = false;
    }
    if (boundary) emit(j);
    i = j;
  }
  emit(n);
  return out;
}

TokenSequence tokenize(std::string_view text) {
  TokenSequence out;
  std::string current;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto [cp, len] = decode_utf8(text, pos);
    pos += len;
    if (is_word_char(cp)) {
      append_utf8(current, to_lower(cp));
    } else if (!current.empty()) {
      out.tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) out.tokens.push_back(std::move(current));
  return out;
}

}  // namespace cec
