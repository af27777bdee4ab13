#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace cec {

/// Two metrics measured on the same instances, aligned by position.
struct PairedSample {
  std::vector<double> a;
  std::vector<double> b;
  std::pair<std::string, std::string> labels{"a", "b"};

  /// Throws InvalidArgument unless |a| == |b| >= 2.
  void check() const;
  std::vector<double> differences() const;  // a - b
};

struct Descriptive {
  double mean = 0.0;
  double sd = 0.0;  // sample SD, n - 1 denominator
  double min = 0.0;
  double max = 0.0;
  std::size_t n = 0;
  bool single_value = false;  // n == 1: sd reported as 0
};

/// Throws EmptySample on empty input.
Descriptive descriptive(std::span<const double> xs);

struct TTestResult {
  double t = 0.0;
  std::size_t df = 0;
  double p = 1.0;  // two-tailed
};

/// Paired-sample t-test on a - b. Throws ZeroVariance when every difference
/// is equal.
TTestResult paired_t_test(const PairedSample& s);

enum class WilcoxonMode { Auto, Exact, Normal };

/// Sample sizes (after dropping zero differences) up to this use the exact
/// null distribution in Auto mode.
inline constexpr std::size_t kWilcoxonExactMax = 20;

struct WilcoxonResult {
  double w = 0.0;        // min(W+, W-)
  double w_plus = 0.0;
  double w_minus = 0.0;
  double p = 1.0;        // two-tailed
  std::size_t n = 0;     // nonzero differences
  bool exact = false;
};

/// Wilcoxon signed-rank test. Zero differences are dropped; ties get average
/// ranks. Exact mode enumerates the signed-rank null distribution; normal
/// mode uses a continuity correction and tie-adjusted variance. Throws
/// AllZeroDifferences, or InsufficientData when only one nonzero difference
/// remains.
WilcoxonResult wilcoxon_signed_rank(const PairedSample& s,
                                    WilcoxonMode mode = WilcoxonMode::Auto);

/// (mean_a - mean_b) / sqrt((sd_a^2 + sd_b^2) / 2). Throws ZeroVariance when
/// both SDs are 0.
double cohens_d_pooled(const PairedSample& s);
/// mean(d) / sd(d), equal to t / sqrt(n). Throws ZeroVariance when sd(d) = 0.
double cohens_d_z(const PairedSample& s);

struct EffectSizes {
  double d_pooled = 0.0;
  double d_z = 0.0;
};

EffectSizes effect_sizes(const PairedSample& s);

/// Everything reported for one metric-vs-metric comparison.
struct PairedTestResult {
  double t_stat = 0.0;
  std::size_t df = 0;
  double p_t = 1.0;
  double w_stat = 0.0;
  double p_w = 1.0;
  bool wilcoxon_exact = false;
  double d_pooled = 0.0;
  double d_z = 0.0;
  double mean_a = 0.0;
  double sd_a = 0.0;
  double mean_b = 0.0;
  double sd_b = 0.0;
  std::size_t n = 0;
};

PairedTestResult paired_comparison(const PairedSample& s,
                                   WilcoxonMode mode = WilcoxonMode::Auto);

// Distribution functions.

/// Regularized incomplete beta I_x(a, b), by Lentz's continued fraction.
double regularized_incomplete_beta(double a, double b, double x);
/// Student-t CDF with `df` degrees of freedom.
double student_t_cdf(double t, double df);
/// Two-tailed P(|T| >= |t|).
double student_t_two_tailed(double t, double df);
double normal_cdf(double z);

}  // namespace cec
