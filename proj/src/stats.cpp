#include "cec/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "cec/error.hpp"

namespace cec {

namespace {

double mean_of(std::span<const double> xs) {
  return std::accumulate(xs.begin(), xs.end(), 0.0) /
         static_cast<double>(xs.size());
}

// Two-pass sample variance.
double sample_variance(std::span<const double> xs, double mean) {
  if (xs.size() < 2) return 0.0;
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return ss / static_cast<double>(xs.size() - 1);
}

double beta_continued_fraction(double a, double b, double x) {
  constexpr int kMaxIter = 10000;
  constexpr double kEps = 1e-16;
  constexpr double kTiny = 1e-300;
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) break;
  }
  return h;
}

}  // namespace

void PairedSample::check() const {
  if (a.size() != b.size()) {
    throw Error(ErrorCode::InvalidArgument,
                "paired sample sides differ in length (" +
                    std::to_string(a.size()) + " vs " +
                    std::to_string(b.size()) + ")");
  }
  if (a.size() < 2) {
    throw Error(ErrorCode::InsufficientData,
                "paired sample needs at least 2 pairs");
  }
}

std::vector<double> PairedSample::differences() const {
  std::vector<double> d(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
  return d;
}

Descriptive descriptive(std::span<const double> xs) {
  if (xs.empty()) throw Error(ErrorCode::EmptySample, "empty sample");
  Descriptive out;
  out.n = xs.size();
  out.mean = mean_of(xs);
  out.sd = std::sqrt(sample_variance(xs, out.mean));
  auto [lo, hi] = std::minmax_element(xs.begin(), xs.end());
  out.min = *lo;
  out.max = *hi;
  out.single_value = xs.size() == 1;
  return out;
}

double regularized_incomplete_beta(double a, double b, double x) {
  if (a <= 0.0 || b <= 0.0) {
    throw Error(ErrorCode::InvalidArgument, "incomplete beta needs a, b > 0");
  }
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double log_front = std::lgamma(a + b) - std::lgamma(a) -
                           std::lgamma(b) + a * std::log(x) +
                           b * std::log1p(-x);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return front * beta_continued_fraction(a, b, x) / a;
  }
  return 1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b;
}

double student_t_two_tailed(double t, double df) {
  if (std::isinf(t)) return 0.0;
  const double x = df / (df + t * t);
  return std::clamp(regularized_incomplete_beta(df / 2.0, 0.5, x), 0.0, 1.0);
}

double student_t_cdf(double t, double df) {
  const double tail = student_t_two_tailed(t, df) / 2.0;
  return t >= 0.0 ? 1.0 - tail : tail;
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

TTestResult paired_t_test(const PairedSample& s) {
  s.check();
  const auto d = s.differences();
  const double mean = mean_of(d);
  const double sd = std::sqrt(sample_variance(d, mean));
  if (sd == 0.0) {
    throw Error(ErrorCode::ZeroVariance,
                "all paired differences are equal; t is undefined");
  }
  TTestResult out;
  out.df = d.size() - 1;
  out.t = mean / (sd / std::sqrt(static_cast<double>(d.size())));
  out.p = student_t_two_tailed(out.t, static_cast<double>(out.df));
  return out;
}

WilcoxonResult wilcoxon_signed_rank(const PairedSample& s, WilcoxonMode mode) {
  if (s.a.size() != s.b.size()) s.check();
  std::vector<double> d;
  for (double x : s.differences()) {
    if (x != 0.0) d.push_back(x);
  }
  if (d.empty()) {
    throw Error(ErrorCode::AllZeroDifferences, "every paired difference is zero");
  }
  if (d.size() < 2) {
    throw Error(ErrorCode::InsufficientData,
                "Wilcoxon test needs at least 2 nonzero differences");
  }
  const std::size_t n = d.size();

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
    return std::abs(d[i]) < std::abs(d[j]);
  });

  // Doubled ranks keep tied (half-integer) ranks integral.
  std::vector<std::size_t> rank2(n);
  double tie_term = 0.0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j + 1 < n && std::abs(d[order[j + 1]]) == std::abs(d[order[i]])) ++j;
    const std::size_t r2 = (i + 1) + (j + 1);  // 2 * average of ranks i+1..j+1
    for (std::size_t k = i; k <= j; ++k) rank2[order[k]] = r2;
    const double t = static_cast<double>(j - i + 1);
    tie_term += t * t * t - t;
    i = j + 1;
  }

  WilcoxonResult out;
  out.n = n;
  std::size_t w2_plus = 0;
  std::size_t w2_minus = 0;
  for (std::size_t i = 0; i < n; ++i) {
    (d[i] > 0 ? w2_plus : w2_minus) += rank2[i];
  }
  out.w_plus = w2_plus / 2.0;
  out.w_minus = w2_minus / 2.0;
  out.w = std::min(out.w_plus, out.w_minus);

  out.exact = mode == WilcoxonMode::Exact ||
              (mode == WilcoxonMode::Auto && n <= kWilcoxonExactMax);
  if (out.exact) {
    // Null distribution of the doubled W+: each rank is positive with
    // probability 1/2, independently.
    const std::size_t total2 = w2_plus + w2_minus;
    std::vector<double> prob(total2 + 1, 0.0);
    std::vector<double> next(total2 + 1, 0.0);
    prob[0] = 1.0;
    for (std::size_t r2 : rank2) {
      for (std::size_t v = 0; v <= total2; ++v) {
        next[v] = 0.5 * prob[v] + (v >= r2 ? 0.5 * prob[v - r2] : 0.0);
      }
      prob.swap(next);
    }
    const std::size_t w2 = std::min(w2_plus, w2_minus);
    double lower = 0.0;
    for (std::size_t v = 0; v <= w2; ++v) lower += prob[v];
    out.p = std::min(1.0, 2.0 * lower);
  } else {
    const double nn = static_cast<double>(n);
    const double mean = nn * (nn + 1.0) / 4.0;
    const double var = nn * (nn + 1.0) * (2.0 * nn + 1.0) / 24.0 - tie_term / 48.0;
    const double z = std::max(0.0, std::abs(out.w - mean) - 0.5) / std::sqrt(var);
    out.p = std::clamp(std::erfc(z / std::sqrt(2.0)), 0.0, 1.0);
  }
  return out;
}

double cohens_d_pooled(const PairedSample& s) {
  s.check();
  const auto da = descriptive(s.a);
  const auto db = descriptive(s.b);
  const double pooled = std::sqrt((da.sd * da.sd + db.sd * db.sd) / 2.0);
  if (pooled == 0.0) {
    throw Error(ErrorCode::ZeroVariance, "both samples have zero variance");
  }
  return (da.mean - db.mean) / pooled;
}

double cohens_d_z(const PairedSample& s) {
  s.check();
  const auto diff = descriptive(s.differences());
  if (diff.sd == 0.0) {
    throw Error(ErrorCode::ZeroVariance,
                "paired differences have zero variance; d_z is undefined");
  }
  return diff.mean / diff.sd;
}

EffectSizes effect_sizes(const PairedSample& s) {
  return {cohens_d_pooled(s), cohens_d_z(s)};
}

PairedTestResult paired_comparison(const PairedSample& s, WilcoxonMode mode) {
  const auto t = paired_t_test(s);
  const auto w = wilcoxon_signed_rank(s, mode);
  const auto es = effect_sizes(s);
  const auto da = descriptive(s.a);
  const auto db = descriptive(s.b);
  PairedTestResult out;
  out.t_stat = t.t;
  out.df = t.df;
  out.p_t = t.p;
  out.w_stat = w.w;
  out.p_w = w.p;
  out.wilcoxon_exact = w.exact;
  out.d_pooled = es.d_pooled;
  out.d_z = es.d_z;
  out.mean_a = da.mean;
  out.sd_a = da.sd;
  out.mean_b = db.mean;
  out.sd_b = db.sd;
  out.n = s.a.size();
  return out;
}

}  // namespace cec
