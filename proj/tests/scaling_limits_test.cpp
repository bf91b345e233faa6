#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "pointerlab/error.hpp"
#include "pointerlab/scaling_limits.hpp"

using namespace pointerlab;

namespace {

const double kHalf = 1.0 / std::numbers::sqrt2;

ScalingReport synthetic_report(const std::vector<int>& ns, double base, double target) {
  ScalingReport report;
  report.target = target;
  for (int n : ns) {
    ScalingSummary s;
    s.n = n;
    s.time_avg_D = std::pow(base, n);
    s.p_hat = target + 0.2 * std::pow(0.5, n);
    s.used = 1;
    report.summary.push_back(s);
  }
  report.fit = fit_report(report);
  return report;
}

}  // namespace

TEST(FitExponentialDecay, ExactPowersOfTwo) {
  std::vector<std::pair<double, double>> pts;
  for (int n = 2; n <= 12; ++n) pts.emplace_back(n, std::pow(2.0, -n));
  const auto fit = fit_exponential_decay(pts);
  EXPECT_NEAR(fit.rate, -std::numbers::ln2, 1e-9);
  EXPECT_NEAR(fit.r2, 1.0, 1e-12);
  EXPECT_EQ(fit.points, 11);
}

TEST(FitExponentialDecay, ConstantPointsGiveZeroRate) {
  const auto fit = fit_exponential_decay({{3, 0.2}, {4, 0.2}, {5, 0.2}});
  EXPECT_EQ(fit.rate, 0.0);
  EXPECT_EQ(fit.r2, 1.0);
}

TEST(FitExponentialDecay, DropsNonpositiveValues) {
  const auto fit = fit_exponential_decay({{1, 0.5}, {2, 0.0}, {3, 0.125}, {4, -1.0}, {5, 0.03125}});
  EXPECT_EQ(fit.excluded, 2);
  EXPECT_EQ(fit.points, 3);
  EXPECT_NEAR(fit.rate, -std::numbers::ln2, 1e-12);
}

TEST(FitExponentialDecay, NeedsThreePositivePoints) {
  EXPECT_THROW(fit_exponential_decay({{1, 0.5}, {2, 0.25}}), ValidationError);
  EXPECT_THROW(fit_exponential_decay({{1, 0.5}, {2, 0.25}, {3, 0.0}}), ValidationError);
}

TEST(FitExponentialDecay, RSquaredStaysInUnitInterval) {
  const auto fit = fit_exponential_decay({{1, 0.5}, {2, 0.9}, {3, 0.1}, {4, 0.6}});
  EXPECT_GE(fit.r2, 0.0);
  EXPECT_LE(fit.r2, 1.0);
}

TEST(ExtrapolateLimit, SyntheticExponentialReport) {
  const auto report = synthetic_report({6, 8, 10, 12, 14}, 0.6, 0.5);
  const auto lim = extrapolate_limit(report);
  EXPECT_EQ(lim.D_inf, 0.0);
  EXPECT_GT(lim.D_uncertainty, 0.0);
  EXPECT_LE(std::abs(lim.p_inf - 0.5), lim.p_uncertainty + 1e-12);
}

TEST(ExtrapolateLimit, RefusesFlatOverlap) {
  const auto report = synthetic_report({6, 8, 10}, 1.0, 0.5);
  EXPECT_THROW(extrapolate_limit(report), FitRefusal);
}

TEST(ExtrapolateLimit, RefusesPoorFit) {
  ScalingReport report;
  const double values[] = {0.5, 0.05, 0.4, 0.01, 0.3};
  for (int i = 0; i < 5; ++i) {
    ScalingSummary s;
    s.n = 6 + i;
    s.time_avg_D = values[i];
    s.used = 1;
    report.summary.push_back(s);
  }
  EXPECT_THROW(extrapolate_limit(report), FitRefusal);
}

TEST(ScanN, UniformCouplingsMatchQuadrature) {
  ScanOptions opt;
  opt.T = 200.0;
  EvolutionConfig cfg;
  const auto report =
      scan_n(ModelSpec::uniform(1, 1.0), {6, 8, 10}, Complex{kHalf}, Complex{kHalf}, cfg, opt);
  ASSERT_EQ(report.rows.size(), 3u);
  for (const auto& row : report.rows) {
    const double ref = oracle::overlap_average(std::vector<double>(row.n, 1.0), opt.T);
    EXPECT_NEAR(row.time_avg_D / ref, 1.0, 0.05) << "n " << row.n;
  }
}

TEST(ScanN, DisorderedOverlapDecreasesWithN) {
  ScanOptions opt;
  opt.T = 200.0;
  const auto report = scan_n(ModelSpec::disordered(1, 1), {6, 8, 10}, Complex{kHalf},
                             Complex{kHalf}, EvolutionConfig{}, opt);
  for (std::size_t i = 1; i < report.rows.size(); ++i) {
    EXPECT_EQ(report.rows[i].n, report.rows[i - 1].n + 2);
    EXPECT_LT(report.rows[i].time_avg_D, report.rows[i - 1].time_avg_D);
  }
}

TEST(ScanN, CommensurateUniformSamplingIsRefused) {
  // Sampling a uniform model at multiples of its recurrence time sees no decay.
  ScanOptions opt;
  for (int k = 0; k <= 40; ++k) opt.times.push_back(2.0 * std::numbers::pi * k);
  const auto report = scan_n(ModelSpec::uniform(1, 1.0), {4, 6, 8}, Complex{kHalf},
                             Complex{kHalf}, EvolutionConfig{}, opt);
  for (const auto& row : report.rows) EXPECT_NEAR(row.time_avg_D, 1.0, 1e-8);
  EXPECT_THROW(extrapolate_limit(report), FitRefusal);
}

TEST(ScanN, RowsIndependentOfThreadCount) {
  ScanOptions opt;
  opt.T = 60.0;
  opt.seeds = {1, 2, 3};
  const auto model = ModelSpec::disordered(1, 1);
  const Complex c0{std::sqrt(0.3)}, c1{std::sqrt(0.7)};
  const auto one = scan_n(model, {4, 5, 6}, c0, c1, EvolutionConfig{}, opt);
  opt.threads = 4;
  const auto four = scan_n(model, {4, 5, 6}, c0, c1, EvolutionConfig{}, opt);
  ASSERT_EQ(one.rows.size(), four.rows.size());
  for (std::size_t i = 0; i < one.rows.size(); ++i) {
    EXPECT_EQ(one.rows[i].n, four.rows[i].n);
    EXPECT_EQ(one.rows[i].seed, four.rows[i].seed);
    EXPECT_EQ(one.rows[i].time_avg_D, four.rows[i].time_avg_D);
    EXPECT_EQ(one.rows[i].p_hat, four.rows[i].p_hat);
  }
}

TEST(ScanN, SortsAndMediansOverSeeds) {
  ScanOptions opt;
  opt.T = 40.0;
  opt.seeds = {3, 1, 2};
  const auto report = scan_n(ModelSpec::disordered(1, 1), {6, 4, 5}, Complex{kHalf},
                             Complex{kHalf}, EvolutionConfig{}, opt);
  ASSERT_EQ(report.summary.size(), 3u);
  EXPECT_EQ(report.summary[0].n, 4);
  for (std::size_t i = 1; i < report.rows.size(); ++i) {
    EXPECT_LE(report.rows[i - 1].n, report.rows[i].n);
  }
  std::vector<double> d;
  for (const auto& r : report.rows) {
    if (r.n == 4 && !r.flagged) d.push_back(r.time_avg_D);
  }
  if (d.size() == 3) {
    std::sort(d.begin(), d.end());
    EXPECT_EQ(report.summary[0].time_avg_D, d[1]);
  }
}

TEST(ScanN, RejectsShortUnitLists) {
  EXPECT_THROW(scan_n(ModelSpec::uniform(1), {4, 6}, Complex{1.0}, Complex{0.0},
                      EvolutionConfig{}, ScanOptions{}),
               ValidationError);
}
