#pragma once

// Straightforward reference implementations used as test oracles. They share
// no code with the library and favour obviousness over speed: exhaustive
// enumeration where the real code searches or uses dynamic programming.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <sstream>
#include <string>
#include <vector>

namespace oracle {

inline std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 14695981039346656037ULL;
  for (std::size_t i = 0; i < s.size(); ++i) {
    h = h ^ static_cast<std::uint8_t>(s[i]);
    h = h * 1099511628211ULL;
  }
  return h;
}

struct SplitMix {
  std::uint64_t x;
  std::uint64_t operator()() {
    x += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = x;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }
};

/// Fisher-Yates prefix over 0..population-1.
inline std::vector<std::size_t> sample(std::size_t population, std::size_t n,
                                       std::uint64_t seed) {
  std::vector<std::size_t> idx(population);
  for (std::size_t i = 0; i < population; ++i) idx[i] = i;
  SplitMix rng{seed};
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t j = i + static_cast<std::size_t>(rng() % (population - i));
    std::swap(idx[i], idx[j]);
  }
  idx.resize(n);
  return idx;
}

/// Whitespace split; inputs are lowercase ASCII words.
inline std::vector<std::string> words(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  for (std::string w; in >> w;) out.push_back(w);
  return out;
}

inline std::vector<double> bow(const std::string& text, std::size_t d) {
  std::vector<double> v(d, 0.0);
  for (const auto& w : words(text)) v[fnv1a(w) % d] += 1.0;
  double ss = 0.0;
  for (double x : v) ss += x * x;
  if (ss > 0) {
    for (double& x : v) x /= std::sqrt(ss);
  }
  return v;
}

inline double cos(const std::vector<double>& u, const std::vector<double>& v) {
  double uv = 0, uu = 0, vv = 0;
  for (std::size_t k = 0; k < u.size(); ++k) {
    uv += u[k] * v[k];
    uu += u[k] * u[k];
    vv += v[k] * v[k];
  }
  if (uu == 0 || vv == 0) return 0.0;
  return uv / std::sqrt(uu * vv);
}

struct Cec {
  double forward, backward, symmetric;
};

/// Both sides nonempty.
inline Cec cec(const std::vector<std::vector<double>>& g,
               const std::vector<std::vector<double>>& a) {
  std::vector<std::vector<double>> sim(g.size(), std::vector<double>(a.size()));
  for (std::size_t i = 0; i < g.size(); ++i)
    for (std::size_t j = 0; j < a.size(); ++j) sim[i][j] = cos(g[i], a[j]);
  double f = 0, b = 0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    double best = -2;
    for (std::size_t j = 0; j < a.size(); ++j) best = std::max(best, sim[i][j]);
    f += best;
  }
  for (std::size_t j = 0; j < a.size(); ++j) {
    double best = -2;
    for (std::size_t i = 0; i < g.size(); ++i) best = std::max(best, sim[i][j]);
    b += best;
  }
  f /= static_cast<double>(g.size());
  b /= static_cast<double>(a.size());
  return {f, b, 0.5 * (f + b)};
}

using Seq = std::vector<std::string>;

inline std::map<Seq, int> ngrams(const Seq& s, std::size_t n) {
  std::map<Seq, int> out;
  for (std::size_t i = 0; i + n <= s.size(); ++i)
    out[Seq(s.begin() + static_cast<long>(i), s.begin() + static_cast<long>(i + n))]++;
  return out;
}

inline int clipped_overlap(const Seq& g, const Seq& r, std::size_t n) {
  auto gm = ngrams(g, n);
  auto rm = ngrams(r, n);
  int hits = 0;
  for (const auto& [k, c] : gm) {
    auto it = rm.find(k);
    if (it != rm.end()) hits += std::min(c, it->second);
  }
  return hits;
}

inline double bleu(const Seq& g, const Seq& r) {
  if (g.empty() || r.empty()) return 0.0;
  const std::size_t order = std::min<std::size_t>(4, g.size());
  double log_sum = 0.0;
  for (std::size_t n = 1; n <= order; ++n) {
    const double total = static_cast<double>(g.size() - n + 1);
    const int hits = clipped_overlap(g, r, n);
    const double p = hits > 0 ? hits / total : 0.1 / total;
    log_sum += std::log(p);
  }
  const double ratio = static_cast<double>(r.size()) / static_cast<double>(g.size());
  const double bp = ratio <= 1.0 ? 1.0 : std::exp(1.0 - ratio);
  return bp * std::exp(log_sum / static_cast<double>(order));
}

inline double f1(double hits, double ng, double nr) {
  if (ng == 0 || nr == 0 || hits == 0) return 0.0;
  const double p = hits / ng, r = hits / nr;
  return 2 * p * r / (p + r);
}

inline double rouge_n(const Seq& g, const Seq& r, std::size_t n) {
  if (g.size() < n || r.size() < n) return 0.0;
  return f1(clipped_overlap(g, r, n), static_cast<double>(g.size() - n + 1),
            static_cast<double>(r.size() - n + 1));
}

/// Longest subsequence of x (tried by subset enumeration) that is also a
/// subsequence of y. Exponential in |x|.
inline std::size_t lcs(const Seq& x, const Seq& y) {
  std::size_t best = 0;
  for (std::uint32_t mask = 0; mask < (1u << x.size()); ++mask) {
    Seq sub;
    for (std::size_t i = 0; i < x.size(); ++i)
      if (mask & (1u << i)) sub.push_back(x[i]);
    std::size_t k = 0;
    for (std::size_t j = 0; j < y.size() && k < sub.size(); ++j)
      if (y[j] == sub[k]) ++k;
    if (k == sub.size()) best = std::max(best, sub.size());
  }
  return best;
}

inline double rouge_l(const Seq& g, const Seq& r) {
  return f1(static_cast<double>(lcs(g, r)), static_cast<double>(g.size()),
            static_cast<double>(r.size()));
}

struct Alignment {
  int matches = 0;
  int chunks = 0;
};

/// Enumerates every injective exact-match alignment and keeps the one with
/// the most matches, then the fewest chunks.
inline Alignment meteor_alignment(const Seq& g, const Seq& r) {
  Alignment best{-1, 0};
  std::vector<int> map(g.size(), -1);
  std::vector<bool> used(r.size(), false);
  auto score = [&] {
    Alignment a;
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (map[i] < 0) continue;
      ++a.matches;
      const bool continues = i > 0 && map[i - 1] >= 0 && map[i - 1] + 1 == map[i];
      if (!continues) ++a.chunks;
    }
    if (a.matches > best.matches ||
        (a.matches == best.matches && a.chunks < best.chunks))
      best = a;
  };
  auto rec = [&](auto& self, std::size_t i) -> void {
    if (i == g.size()) {
      score();
      return;
    }
    map[i] = -1;
    self(self, i + 1);
    for (std::size_t j = 0; j < r.size(); ++j) {
      if (used[j] || r[j] != g[i]) continue;
      used[j] = true;
      map[i] = static_cast<int>(j);
      self(self, i + 1);
      map[i] = -1;
      used[j] = false;
    }
  };
  rec(rec, 0);
  return best;
}

inline double meteor(const Seq& g, const Seq& r) {
  const auto a = meteor_alignment(g, r);
  if (a.matches <= 0) return 0.0;
  const double p = a.matches / static_cast<double>(g.size());
  const double rc = a.matches / static_cast<double>(r.size());
  const double fmean = p * rc / (0.9 * p + 0.1 * rc);
  const double frag = static_cast<double>(a.chunks) / a.matches;
  return fmean * (1.0 - 0.5 * frag * frag * frag);
}

/// Average ranks of |d| (nonzero entries only).
inline std::vector<double> average_ranks(const std::vector<double>& absd) {
  std::vector<double> ranks(absd.size());
  for (std::size_t i = 0; i < absd.size(); ++i) {
    double below = 0, equal = 0;
    for (double y : absd) {
      if (y < absd[i]) ++below;
      if (y == absd[i]) ++equal;
    }
    ranks[i] = below + (equal + 1) / 2.0;
  }
  return ranks;
}

/// Two-tailed exact Wilcoxon p by enumerating all 2^n sign patterns:
/// min(1, 2 P(T+ <= min(W+, W-))).
inline double wilcoxon_exact_p(const std::vector<double>& d) {
  std::vector<double> nz;
  for (double x : d)
    if (x != 0) nz.push_back(x);
  std::vector<double> absd;
  for (double x : nz) absd.push_back(std::fabs(x));
  const auto ranks = average_ranks(absd);
  double wp = 0, total = 0;
  for (std::size_t i = 0; i < nz.size(); ++i) {
    total += ranks[i];
    if (nz[i] > 0) wp += ranks[i];
  }
  const double w = std::min(wp, total - wp);
  const std::uint64_t patterns = 1ULL << nz.size();
  std::uint64_t at_most = 0;
  for (std::uint64_t mask = 0; mask < patterns; ++mask) {
    double t = 0;
    for (std::size_t i = 0; i < nz.size(); ++i)
      if (mask & (1ULL << i)) t += ranks[i];
    if (t <= w + 1e-9) ++at_most;
  }
  return std::min(1.0, 2.0 * static_cast<double>(at_most) / static_cast<double>(patterns));
}

/// Student-t CDF for two degrees of freedom, closed form.
inline double t_cdf_df2(double t) { return 0.5 * (1.0 + t / std::sqrt(2.0 + t * t)); }

inline double mean(const std::vector<double>& x) {
  double s = 0;
  for (double v : x) s += v;
  return s / static_cast<double>(x.size());
}

inline double sd(const std::vector<double>& x) {
  const double m = mean(x);
  double ss = 0;
  for (double v : x) ss += (v - m) * (v - m);
  return std::sqrt(ss / static_cast<double>(x.size() - 1));
}

}  // namespace oracle
