#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "test_support.hpp"
#include "unifluct/error.hpp"
#include "unifluct/ks.hpp"

namespace {

using namespace unifluct;

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

// Direct 1000-term alternating sum, no switching between series forms.
double q_oracle(double lambda) {
  double sum = 0.0;
  for (int k = 1; k <= 1000; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    sum += (k % 2 == 1 ? term : -term);
  }
  return 2.0 * sum;
}

// Supremum by evaluating both one-sided limits of the empirical cdf at every
// sample point, plus a dense uniform grid, counting the sample each time.
double sup_oracle(const std::vector<double>& xs, const ModelCdf& f) {
  const double n = static_cast<double>(xs.size());
  const auto count_le = [&](double x) {
    return static_cast<double>(std::count_if(xs.begin(), xs.end(), [x](double v) { return v <= x; }));
  };
  const auto count_lt = [&](double x) {
    return static_cast<double>(std::count_if(xs.begin(), xs.end(), [x](double v) { return v < x; }));
  };
  double d = 0.0;
  for (double x : xs) {
    d = std::max(d, std::abs(count_le(x) / n - f(x)));
    d = std::max(d, std::abs(count_lt(x) / n - f(x)));
  }
  const auto [lo, hi] = std::minmax_element(xs.begin(), xs.end());
  for (int k = 0; k <= 2000; ++k) {
    const double x = *lo - 1.0 + (*hi - *lo + 2.0) * k / 2000.0;
    d = std::max(d, std::abs(count_le(x) / n - f(x)));
  }
  return d;
}

TEST(EmpiricalCdf, StepValues) {
  const std::vector<double> one{1.0};
  const EmpiricalCdf e1(one);
  EXPECT_EQ(e1(0.5), 0.0);
  EXPECT_EQ(e1(1.0), 1.0);
  const std::vector<double> three{3.0, 1.0, 2.0};
  const EmpiricalCdf e3(three);
  EXPECT_DOUBLE_EQ(e3(2.0), 2.0 / 3.0);
  double prev = 0.0;
  for (double x = 0.0; x <= 4.0; x += 0.01) {
    ASSERT_GE(e3(x), prev);
    prev = e3(x);
  }
  EXPECT_EQ(e3(0.0), 0.0);
  EXPECT_EQ(e3(4.0), 1.0);
  EXPECT_THROW(EmpiricalCdf(std::vector<double>{}), Error);
}

TEST(KsStatistic, SinglePointAgainstUniform) {
  const ModelCdf uniform = [](double x) { return std::clamp(x, 0.0, 1.0); };
  const std::vector<double> s{0.5};
  const auto r = ks_statistic(s, uniform);
  EXPECT_DOUBLE_EQ(r.d_stat, 0.5);
  EXPECT_EQ(r.d_location, 0.5);
}

TEST(KsStatistic, ConstantModel) {
  const std::vector<double> s{0.3, -2.0, 5.0, 1.1};
  for (double c : {0.0, 0.2, 0.5, 0.9}) {
    const auto r = ks_statistic(s, [c](double) { return c; });
    EXPECT_DOUBLE_EQ(r.d_stat, std::max(c, 1.0 - c));
  }
}

TEST(KsStatistic, SampleAtModelQuantiles) {
  const std::size_t n = 200;
  std::vector<double> s;
  for (std::size_t i = 1; i <= n; ++i) s.push_back(static_cast<double>(i) / (n + 1));
  const auto r = ks_statistic(s, [](double x) { return std::clamp(x, 0.0, 1.0); });
  EXPECT_LE(r.d_stat, 1.0 / (n + 1) + 1e-12);
}

TEST(KsStatistic, MatchesBruteForceSupremum) {
  std::mt19937_64 rng(99);
  std::uniform_int_distribution<int> size(1, 50);
  std::normal_distribution<double> draw(0.3, 1.4);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> xs(static_cast<std::size_t>(size(rng)));
    for (auto& x : xs) x = draw(rng);
    const ModelCdf f = normal_cdf;
    EXPECT_NEAR(ks_statistic(xs, f).d_stat, sup_oracle(xs, f), 1e-12) << trial;
  }
}

TEST(KsStatistic, AffineInvariance) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> draw(0.0, 1.0);
  std::vector<double> xs(300);
  for (auto& x : xs) x = draw(rng) * 1.1 + 0.1;
  const double d0 = ks_statistic(xs, normal_cdf).d_stat;
  for (auto [a, b] : {std::pair{2.5, -1.0}, std::pair{0.01, 3.0}, std::pair{40.0, 7.0}}) {
    std::vector<double> ys;
    for (double x : xs) ys.push_back(a * x + b);
    const ModelCdf g = [a, b](double y) { return normal_cdf((y - b) / a); };
    EXPECT_NEAR(ks_statistic(ys, g).d_stat, d0, 1e-12);
  }
}

TEST(KsStatistic, CountsTies) {
  const std::vector<double> s{0.1, 0.2, 0.2, 0.7, 0.7, 0.7};
  EXPECT_EQ(ks_test(s, [](double x) { return x; }).ties, 3u);
}

TEST(KsPvalue, Extremes) {
  EXPECT_EQ(ks_pvalue(0.0, 10), 1.0);
  EXPECT_LT(ks_pvalue(1.0, 100), 1e-12);
  EXPECT_EQ(kolmogorov_survival(0.0), 1.0);
}

TEST(KsPvalue, SurvivalMatchesLongSeries) {
  for (double lambda : {0.5, 1.0, 1.5}) {
    EXPECT_NEAR(kolmogorov_survival(lambda), q_oracle(lambda), 1e-10) << lambda;
  }
  for (double lambda = 0.3; lambda <= 3.0; lambda += 0.01) {
    ASSERT_NEAR(kolmogorov_survival(lambda), q_oracle(lambda), 1e-10) << lambda;
  }
}

TEST(KsPvalue, Conventions) {
  const double d = 0.02;
  const std::size_t n = 3000;
  const double rn = std::sqrt(3000.0);
  EXPECT_NEAR(ks_pvalue(d, n), q_oracle((rn + 0.12 + 0.11 / rn) * d), 1e-10);
  EXPECT_NEAR(ks_pvalue(d, n, PValueConvention::kAsymptotic), q_oracle(rn * d), 1e-10);
}

TEST(KsPvalue, StrictlyDecreasingInD) {
  // From lambda ~ 0.25 up; below that Q(lambda) rounds to 1 in double.
  double prev = 1.0;
  for (int k = 25; k <= 300; ++k) {
    const double p = ks_pvalue(0.001 * k, 100);
    ASSERT_LT(p, prev) << k;
    ASSERT_GE(p, 0.0);
    prev = p;
  }
}

TEST(KsTest, SuperUniformUnderTheModel) {
  const auto& table = unifluct::testing::default_table();
  const auto tr = truncate(table, -2.5, 5.0);
  const ModelCdf model = [&](double x) { return tr.cdf(x); };
  int rejected = 0;
  for (std::uint64_t seed = 1; seed <= 200; ++seed) {
    const auto r = ks_test(sample(tr, 500, 1000 + seed), model);
    EXPECT_GE(r.p_value, 0.0);
    EXPECT_LE(r.p_value, 1.0);
    if (r.p_value < 0.05) ++rejected;
  }
  EXPECT_LE(rejected, 20);
}

TEST(DistanceCurve, ZeroFarOutside) {
  const std::vector<double> s{-0.3, 0.1, 0.4};
  const std::vector<double> grid{-40.0, 40.0};
  const auto c = distance_curve(s, normal_cdf, grid);
  ASSERT_EQ(c.size(), 2u);
  EXPECT_LT(c[0].distance, 1e-12);
  EXPECT_LT(c[1].distance, 1e-12);
}

TEST(DistanceCurve, MaxOverRefinedGridIsStatistic) {
  std::mt19937_64 rng(21);
  std::normal_distribution<double> draw(0.2, 0.9);
  std::vector<double> xs(400);
  for (auto& x : xs) x = draw(rng);
  // Each order statistic and its left neighbour in floating point, so both
  // one-sided limits of the step function are seen.
  std::vector<double> grid;
  for (double x : xs) {
    grid.push_back(x);
    grid.push_back(std::nextafter(x, -std::numeric_limits<double>::infinity()));
  }
  std::sort(grid.begin(), grid.end());
  const auto c = distance_curve(xs, normal_cdf, grid);
  double mx = 0.0;
  for (const auto& p : c) mx = std::max(mx, p.distance);
  EXPECT_NEAR(mx, ks_statistic(xs, normal_cdf).d_stat, 1e-12);
}

}  // namespace
