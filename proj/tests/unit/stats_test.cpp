#include <doctest.h>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>

#include <cmath>
#include <random>

#include "cec/error.hpp"
#include "cec/stats.hpp"
#include "oracles/reference.hpp"
#include "support/constructed.hpp"

using namespace cec;

namespace {

PairedSample from_differences(const std::vector<double>& d) {
  PairedSample s;
  s.a = d;
  s.b.assign(d.size(), 0.0);
  return s;
}

ErrorCode error_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::Io;
}

}  // namespace

TEST_CASE("descriptive statistics") {
  std::vector<double> xs{0.5, 0.75};
  auto d = descriptive(xs);
  CHECK(d.mean == doctest::Approx(0.625));
  CHECK(d.sd == doctest::Approx(0.1767767).epsilon(1e-7));
  CHECK(d.min == 0.5);
  CHECK(d.max == 0.75);
  std::vector<double> same{0.3, 0.3, 0.3};
  auto c = descriptive(same);
  CHECK(c.mean == doctest::Approx(0.3));
  CHECK(c.sd == 0.0);
  std::vector<double> one{2.0};
  CHECK(descriptive(one).single_value);
  CHECK(error_of([] { descriptive(std::vector<double>{}); }) == ErrorCode::EmptySample);
}

TEST_CASE("paired t-test on differences [1, 2, 3]") {
  auto r = paired_t_test(from_differences({1, 2, 3}));
  CHECK(r.t == doctest::Approx(2.0 * std::sqrt(3.0)).epsilon(1e-12));
  CHECK(std::fabs(r.t - 3.4641) <= 1e-4);
  CHECK(r.df == 2);
  const double closed = 2.0 * (1.0 - oracle::t_cdf_df2(r.t));
  CHECK(r.p == doctest::Approx(closed).epsilon(1e-10));
  CHECK(std::fabs(r.p - 0.0742) <= 1e-3);
}

TEST_CASE("paired t-test degenerate inputs") {
  PairedSample same{{0.4, 0.5, 0.6}, {0.4, 0.5, 0.6}};
  CHECK(error_of([&] { paired_t_test(same); }) == ErrorCode::ZeroVariance);
  PairedSample shifted{{1.5, 2.5, 3.5}, {1, 2, 3}};
  CHECK(error_of([&] { paired_t_test(shifted); }) == ErrorCode::ZeroVariance);
  PairedSample short_{{1.0}, {0.0}};
  CHECK(error_of([&] { paired_t_test(short_); }) == ErrorCode::InsufficientData);
  PairedSample ragged{{1.0, 2.0}, {0.0}};
  CHECK(error_of([&] { paired_t_test(ragged); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("t CDF matches the two-degree closed form") {
  double worst = 0;
  for (double t = -10.0; t <= 10.0; t += 0.01) {
    worst = std::max(worst, std::fabs(student_t_cdf(t, 2) - oracle::t_cdf_df2(t)));
  }
  CHECK(worst < 1e-8);
}

TEST_CASE("t CDF matches boost across degrees of freedom") {
  for (double df : {1.0, 2.5, 3.0, 7.0, 30.0, 99.0, 500.0}) {
    boost::math::students_t dist(df);
    for (double t : {-50.0, -6.0, -2.0, -0.3, 0.0, 0.7, 1.96, 4.0, 12.0, 100.34}) {
      CHECK(student_t_cdf(t, df) == doctest::Approx(boost::math::cdf(dist, t)).epsilon(1e-9));
    }
  }
  boost::math::normal n01;
  for (double z : {-5.0, -1.0, 0.0, 0.5, 3.0}) {
    CHECK(normal_cdf(z) == doctest::Approx(boost::math::cdf(n01, z)).epsilon(1e-12));
  }
  CHECK(regularized_incomplete_beta(2, 3, 0) == 0.0);
  CHECK(regularized_incomplete_beta(2, 3, 1) == 1.0);
  CHECK(regularized_incomplete_beta(1, 1, 0.37) == doctest::Approx(0.37));
}

TEST_CASE("Wilcoxon examples") {
  auto tied = wilcoxon_signed_rank(from_differences({1, -1}));
  CHECK(tied.w == 1.5);
  CHECK(tied.w_plus == 1.5);
  CHECK(tied.w_minus == 1.5);
  CHECK(error_of([] { wilcoxon_signed_rank(from_differences({0, 0})); }) ==
        ErrorCode::AllZeroDifferences);
  CHECK(error_of([] { wilcoxon_signed_rank(from_differences({0, 0.5})); }) ==
        ErrorCode::InsufficientData);

  std::vector<double> positive(100);
  for (std::size_t i = 0; i < 100; ++i) positive[i] = 0.1 + 0.001 * static_cast<double>(i);
  auto all = wilcoxon_signed_rank(from_differences(positive));
  CHECK(all.w == 0.0);
  CHECK(all.n == 100);
  CHECK_FALSE(all.exact);
  CHECK(all.p < 0.001);
}

TEST_CASE("Wilcoxon drops zero differences before ranking") {
  auto r = wilcoxon_signed_rank(from_differences({0, 2, -1, 3, 0}));
  CHECK(r.n == 3);
  CHECK(r.w_plus == 5);
  CHECK(r.w_minus == 1);
}

TEST_CASE("exact Wilcoxon matches sign-pattern enumeration for n <= 8") {
  std::mt19937_64 rng(17);
  std::uniform_int_distribution<int> mag(1, 6);
  for (std::size_t n = 2; n <= 8; ++n) {
    for (int trial = 0; trial < 60; ++trial) {
      std::vector<double> d(n);
      for (std::size_t i = 0; i < n; ++i) {
        const double m = trial % 2 ? static_cast<double>(mag(rng))
                                   : static_cast<double>(i + 1);
        d[i] = (rng() & 1) ? m : -m;
      }
      auto r = wilcoxon_signed_rank(from_differences(d), WilcoxonMode::Exact);
      CHECK(r.exact);
      CHECK(r.p == doctest::Approx(oracle::wilcoxon_exact_p(d)).epsilon(1e-12));
    }
  }
}

TEST_CASE("normal approximation uses continuity and tie corrections") {
  std::vector<double> d{1, 1, 2, -3, 4, 4, 4, -5, 6, 7, 8, 9};
  auto r = wilcoxon_signed_rank(from_differences(d), WilcoxonMode::Normal);
  std::vector<double> absd;
  for (double x : d) absd.push_back(std::fabs(x));
  const auto ranks = oracle::average_ranks(absd);
  double wp = 0, total = 0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    total += ranks[i];
    if (d[i] > 0) wp += ranks[i];
  }
  const double n = static_cast<double>(d.size());
  // tie groups: {1,1} and {4,4,4}
  const double tie = (8.0 - 2.0) + (27.0 - 3.0);
  const double var = n * (n + 1) * (2 * n + 1) / 24.0 - tie / 48.0;
  const double w = std::min(wp, total - wp);
  const double z = (std::fabs(w - n * (n + 1) / 4.0) - 0.5) / std::sqrt(var);
  boost::math::normal n01;
  CHECK(r.w == doctest::Approx(w));
  CHECK(r.p == doctest::Approx(2.0 * boost::math::cdf(boost::math::complement(n01, z)))
                   .epsilon(1e-12));
  CHECK_FALSE(r.exact);
}

TEST_CASE("Auto mode switches at the exact-mode limit") {
  std::vector<double> d(kWilcoxonExactMax);
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = (i % 3 ? 1.0 : -1.0) * static_cast<double>(i + 1);
  CHECK(wilcoxon_signed_rank(from_differences(d)).exact);
  d.push_back(33);
  CHECK_FALSE(wilcoxon_signed_rank(from_differences(d)).exact);
}

TEST_CASE("effect sizes") {
  const auto za = testing::standardized(100, 1);
  const auto zb = testing::standardized(100, 2);
  PairedSample reported{testing::with_moments(za, 0.908, 0.017),
                     testing::with_moments(zb, 0.720, 0.047)};
  const double expected = 0.188 / std::sqrt((0.017 * 0.017 + 0.047 * 0.047) / 2.0);
  CHECK(cohens_d_pooled(reported) == doctest::Approx(expected).epsilon(1e-9));
  CHECK(expected == doctest::Approx(5.3196).epsilon(1e-4));

  PairedSample same{{0.1, 0.4, 0.9}, {0.1, 0.4, 0.9}};
  CHECK(cohens_d_pooled(same) == 0.0);
  CHECK(error_of([&] { cohens_d_z(same); }) == ErrorCode::ZeroVariance);
  PairedSample flat{{1, 1, 1}, {0, 0, 0}};
  CHECK(error_of([&] { cohens_d_pooled(flat); }) == ErrorCode::ZeroVariance);
}

TEST_CASE("d_z equals t / sqrt(n)") {
  const auto zb = testing::standardized(100, 3);
  const auto zd = testing::standardized(100, 4);
  PairedSample s;
  s.b = testing::with_moments(zb, 0.72, 0.05);
  const auto d = testing::with_moments(zd, 0.188, 0.018736);
  for (std::size_t i = 0; i < 100; ++i) s.a.push_back(s.b[i] + d[i]);
  auto t = paired_t_test(s);
  CHECK(t.df == 99);
  CHECK(t.t == doctest::Approx(0.188 * 10.0 / 0.018736).epsilon(1e-9));
  CHECK(cohens_d_z(s) == doctest::Approx(t.t / 10.0).epsilon(1e-12));
}

TEST_CASE("swap antisymmetry and scale invariance") {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> dist(0.5, 0.2);
  for (int trial = 0; trial < 50; ++trial) {
    PairedSample s;
    for (int i = 0; i < 25; ++i) {
      s.a.push_back(dist(rng) + 0.1);
      s.b.push_back(dist(rng));
    }
    PairedSample swapped{s.b, s.a};
    auto r = paired_comparison(s);
    auto w = paired_comparison(swapped);
    CHECK(w.t_stat == doctest::Approx(-r.t_stat).epsilon(1e-12));
    CHECK(w.d_pooled == doctest::Approx(-r.d_pooled).epsilon(1e-12));
    CHECK(w.d_z == doctest::Approx(-r.d_z).epsilon(1e-12));
    CHECK(std::fabs(w.p_t - r.p_t) <= 1e-9);
    CHECK(std::fabs(w.p_w - r.p_w) <= 1e-9);

    PairedSample scaled = s;
    for (auto& x : scaled.a) x *= 3.7;
    for (auto& x : scaled.b) x *= 3.7;
    auto k = paired_comparison(scaled);
    CHECK(std::fabs(k.t_stat - r.t_stat) <= 1e-9);
    CHECK(std::fabs(k.d_z - r.d_z) <= 1e-9);
    CHECK(r.p_t >= 0.0);
    CHECK(r.p_t <= 1.0);
    CHECK(r.p_w >= 0.0);
    CHECK(r.p_w <= 1.0);
    CHECK(r.df == 24);
  }
}
