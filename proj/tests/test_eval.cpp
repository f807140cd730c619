// Copyright 2026 The DSOR Toolkit Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "dsor/eval.hpp"
#include "dsor/synth.hpp"
#include "test_support.hpp"

namespace dsor {
namespace {

FilterResult mask_result(std::vector<std::uint8_t> mask) {
  FilterResult r;
  r.keep_mask = std::move(mask);
  for (const auto m : r.keep_mask) {
    (m != 0 ? r.kept_count : r.removed_count) += 1;
  }
  return r;
}

LabeledCloud four_points() {
  PointCloud c;
  c.points = {{1, 0, 0, 0}, {2, 0, 0, 0}, {3, 0, 0, 0}, {4, 0, 0, 0}};
  return LabeledCloud(c, {110, 110, 40, 40}, {110});
}

TEST(Score, HandExamples) {
  const LabeledCloud lc = four_points();
  const auto perfect = score(lc, mask_result({0, 0, 1, 1}));
  EXPECT_EQ(perfect.confusion, (Confusion{2, 0, 0, 2}));
  EXPECT_EQ(perfect.precision(), 1.0);
  EXPECT_EQ(perfect.recall(), 1.0);

  const auto half = score(lc, mask_result({0, 1, 0, 1}));
  EXPECT_EQ(half.confusion, (Confusion{1, 1, 1, 1}));
  EXPECT_EQ(half.precision(), 0.5);
  EXPECT_EQ(half.recall(), 0.5);

  const auto kept = score(lc, mask_result({1, 1, 1, 1}));
  EXPECT_EQ(kept.confusion, (Confusion{0, 0, 2, 2}));
  EXPECT_FALSE(kept.precision().has_value());
  EXPECT_EQ(kept.recall(), 0.0);

  const LabeledCloud no_snow(lc.cloud(), {40, 40, 40, 40}, {110});
  EXPECT_FALSE(score(no_snow, mask_result({0, 1, 1, 1})).recall().has_value());
  EXPECT_THROW((void)score(lc, mask_result({1, 1, 1})), LengthMismatchError);
}

TEST(Score, ComplementaryMasksSwapCells) {
  std::mt19937_64 rng(1);
  const PointCloud c = testing::random_cloud(rng, 500);
  LabelVector labels(c.size());
  std::vector<std::uint8_t> mask(c.size());
  std::vector<std::uint8_t> flipped(c.size());
  for (std::size_t i = 0; i < c.size(); ++i) {
    labels[i] = rng() % 3 == 0 ? 110U : 40U;
    mask[i] = static_cast<std::uint8_t>(rng() % 2);
    flipped[i] = static_cast<std::uint8_t>(1 - mask[i]);
  }
  const LabeledCloud lc(c, labels, {110});
  const Confusion a = confusion_of(lc, mask_result(mask));
  const Confusion b = confusion_of(lc, mask_result(flipped));
  EXPECT_EQ(a.total(), c.size());
  EXPECT_EQ(a.tp, b.fn);
  EXPECT_EQ(a.fn, b.tp);
  EXPECT_EQ(a.fp, b.tn);
  EXPECT_EQ(a.tn, b.fp);
}

TEST(RangeHistogram, HandExamples) {
  PointCloud one;
  one.points = {{3, 4, 0, 0}};
  const auto h = range_histogram(one, mask_result({0}), 10.0, 80.0);
  ASSERT_EQ(h.size(), 9U);
  EXPECT_EQ(h[0].bin_start, 0.0);
  EXPECT_EQ(h[0].bin_end, 10.0);
  EXPECT_EQ(h[0].total, 1U);
  EXPECT_EQ(h[0].removed, 1U);
  EXPECT_EQ(h[0].pct_removed(), 1.0);
  EXPECT_TRUE(std::isinf(h.back().bin_end));

  for (const auto& bin : range_histogram(PointCloud{}, mask_result({}))) {
    EXPECT_EQ(bin.total, 0U);
    EXPECT_FALSE(bin.pct_removed().has_value());
  }

  PointCloud far;
  far.points = {{100, 0, 0, 0}, {80, 0, 0, 0}, {79.5F, 0, 0, 0}};
  const auto hf = range_histogram(far, mask_result({1, 0, 1}));
  EXPECT_EQ(hf.back().total, 2U);
  EXPECT_EQ(hf.back().removed, 1U);
  EXPECT_EQ(hf[hf.size() - 2].total, 1U);

  EXPECT_THROW((void)range_histogram(one, mask_result({0}), 0.0), InvalidArgumentError);
  EXPECT_THROW((void)range_histogram(one, mask_result({0, 1})), LengthMismatchError);
}

TEST(RangeHistogram, TotalsMatchCloudAndFilter) {
  std::mt19937_64 rng(2);
  const PointCloud c = testing::random_cloud(rng, 2000, 150.0);
  const FilterResult r = sor_filter(c, {8, 0.5});
  const auto h = range_histogram(c, r, 7.0, 60.0);
  std::size_t total = 0;
  std::size_t removed = 0;
  for (const auto& bin : h) {
    total += bin.total;
    removed += bin.removed;
    if (bin.pct_removed()) {
      EXPECT_GE(*bin.pct_removed(), 0.0);
      EXPECT_LE(*bin.pct_removed(), 1.0);
    }
  }
  EXPECT_EQ(total, c.size());
  EXPECT_EQ(removed, r.removed_count);
}

TEST(Aggregate, SumsConfusionsAndBins) {
  const LabeledCloud lc = four_points();
  const std::vector<EvalReport> reports{score(lc, mask_result({0, 0, 1, 1})),
                                        score(lc, mask_result({0, 1, 0, 1}))};
  const EvalReport total = aggregate(reports);
  EXPECT_EQ(total.name, "aggregate");
  EXPECT_EQ(total.confusion, (Confusion{3, 1, 1, 3}));
  EXPECT_EQ(total.range_histogram[0].total, 8U);
  EXPECT_EQ(total.range_histogram[0].removed, 4U);
}

TEST(Timing, SummarizeAndBenchmark) {
  TimingStats s;
  s.samples_ms = {4.0, 1.0, 3.0, 2.0};
  summarize(s);
  EXPECT_DOUBLE_EQ(s.mean_ms, 2.5);
  EXPECT_DOUBLE_EQ(s.stddev_ms, std::sqrt(5.0 / 3.0));
  EXPECT_DOUBLE_EQ(s.median_ms, 2.5);
  EXPECT_EQ(s.measurements, 4U);

  std::mt19937_64 rng(3);
  const std::vector<PointCloud> clouds{testing::random_cloud(rng, 300)};
  const TimingStats t = benchmark(DsorParams{}, clouds, {3, 1, 1});
  EXPECT_EQ(t.measurements, 3U);
  EXPECT_EQ(t.samples_ms.size(), 3U);
  EXPECT_TRUE(std::isfinite(t.stddev_ms));
  EXPECT_GE(t.stddev_ms, 0.0);
  EXPECT_EQ(t.filter, "dsor");
  EXPECT_EQ(t.mean_cloud_size, 300.0);
  EXPECT_THROW((void)benchmark(DsorParams{}, std::span<const PointCloud>{}), InvalidArgumentError);
}

PointCloud numbered(std::size_t n) {
  PointCloud c;
  for (std::size_t i = 0; i < n; ++i) {
    c.points.push_back({static_cast<float>(i), 0, 0, 0});
  }
  return c;
}

TEST(Subsample, CountsOrderAndDeterminism) {
  const PointCloud c = numbered(100);
  EXPECT_EQ(subsample(c, 1.0, 9), c);
  const PointCloud half = subsample(c, 0.5, 9);
  ASSERT_EQ(half.size(), 50U);
  for (std::size_t i = 1; i < half.size(); ++i) {
    EXPECT_LT(half[i - 1].x, half[i].x);
  }
  EXPECT_EQ(subsample(c, 0.5, 9), half);
  EXPECT_NE(subsample(c, 0.5, 10), half);
  EXPECT_EQ(subsample(numbered(7), 0.5, 1).size(), 4U);  // round(3.5)
  EXPECT_THROW((void)subsample(c, 0.0, 1), InvalidArgumentError);
  EXPECT_THROW((void)subsample(c, 1.5, 1), InvalidArgumentError);
}

std::vector<ScalingSample> oracle_samples(double (*cost)(double)) {
  std::vector<ScalingSample> s;
  for (const double f : linspace_fractions(0.1, 1.0, 10)) {
    const double n = std::round(f * 200000.0);
    s.push_back({static_cast<std::size_t>(n), cost(n)});
  }
  return s;
}

TEST(PowerLawFit, LinearQuadraticAndNLogNOracles) {
  const auto lin = fit_power_law(oracle_samples([](double n) { return 3e-4 * n; }));
  EXPECT_NEAR(lin.exponent, 1.0, 0.02);
  EXPECT_NEAR(lin.coefficient, 3e-4, 1e-9);
  EXPECT_NEAR(lin.r_squared, 1.0, 1e-12);

  const auto quad = fit_power_law(oracle_samples([](double n) { return 1e-9 * n * n; }));
  EXPECT_NEAR(quad.exponent, 2.0, 0.05);

  // Independent least-squares slope of log(N log N) against log N.
  const auto samples = oracle_samples([](double n) { return 1e-5 * n * std::log(n); });
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (const auto& s : samples) {
    const double x = std::log(static_cast<double>(s.n));
    const double y = std::log(s.time_ms);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double m = static_cast<double>(samples.size());
  const double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
  const auto nlogn = fit_power_law(samples);
  EXPECT_NEAR(nlogn.exponent, slope, 1e-9);
  EXPECT_GT(nlogn.exponent, 1.0);
  EXPECT_LT(nlogn.exponent, 1.15);
  EXPECT_EQ(nlogn.residuals.size(), samples.size());
}

TEST(PowerLawFit, Errors) {
  const std::vector<ScalingSample> two{{10, 1.0}, {20, 2.0}};
  EXPECT_THROW((void)fit_power_law(two), InvalidArgumentError);
  const std::vector<ScalingSample> flat{{10, 1.0}, {10, 2.0}, {10, 3.0}};
  EXPECT_THROW((void)fit_power_law(flat), InvalidArgumentError);
  const std::vector<ScalingSample> zero{{10, 1.0}, {20, 0.0}, {30, 3.0}};
  EXPECT_THROW((void)fit_power_law(zero), InvalidArgumentError);
}

TEST(ScalabilityStudy, UsesSubsampleSizesAndFitsStubCost) {
  const PointCloud c = numbered(10000);
  const auto fractions = linspace_fractions(0.1, 1.0, 10);
  ASSERT_EQ(fractions.size(), 10U);
  EXPECT_DOUBLE_EQ(fractions.front(), 0.1);
  EXPECT_DOUBLE_EQ(fractions.back(), 1.0);
  const auto fit = scalability_study(c, fractions, 2, 7, [](const PointCloud& p) {
    return 0.01 * static_cast<double>(p.size());
  });
  ASSERT_EQ(fit.samples.size(), 10U);
  EXPECT_EQ(fit.samples.front().n, 1000U);
  EXPECT_EQ(fit.samples.back().n, 10000U);
  EXPECT_NEAR(fit.exponent, 1.0, 0.02);
}

std::vector<LabeledCloud> small_corpus() {
  SensorModel sensor;
  sensor.channels = 16;
  sensor.azimuth_step_deg = 1.0;
  SnowSpec snow;
  snow.count = 1500;
  return make_benchmark(2, sensor, suburban_scene(4), snow, 77);
}

TEST(Tune, AgreesWithExhaustiveFilteringOracle) {
  const auto corpus = small_corpus();
  for (const FilterKind kind : {FilterKind::kSor, FilterKind::kDsor, FilterKind::kRor,
                                FilterKind::kDror}) {
    const auto grid = default_grid(kind);
    const TuneResult result = tune(grid, corpus, {0.6, 2});
    ASSERT_EQ(result.candidates.size(), grid.size());
    std::optional<std::size_t> best;
    for (std::size_t g = 0; g < grid.size(); ++g) {
      Confusion c;
      for (const auto& lc : corpus) {
        c += confusion_of(lc, apply_filter(lc.cloud(), grid[g]));
      }
      ASSERT_EQ(result.candidates[g].confusion, c) << describe(grid[g]);
      if (c.precision() && *c.precision() >= 0.6 &&
          (!best || *c.recall() > *result.candidates[*best].confusion.recall())) {
        best = g;
      }
    }
    if (best) {
      EXPECT_TRUE(result.met_floor);
      EXPECT_EQ(result.chosen().confusion.recall(), result.candidates[*best].confusion.recall());
    }
  }
}

TEST(Tune, SingleEntryTieBreakAndFloor) {
  const auto corpus = small_corpus();
  const std::vector<FilterParams> one{DsorParams{12, 1.0, 0.05}};
  EXPECT_EQ(describe(tune(one, corpus).chosen().params), describe(one[0]));

  // A radius too small to contain anyone removes every point; both entries
  // tie, so the smaller radius wins regardless of grid order.
  const std::vector<FilterParams> tied{RorParams{2e-6, 1}, RorParams{1e-6, 1}};
  const TuneResult t = tune(tied, corpus, {0.0, 1});
  EXPECT_EQ(t.best, 1U);
  EXPECT_EQ(t.chosen().confusion.recall(), 1.0);

  const TuneResult none = tune(tied, corpus, {1.01, 1});
  EXPECT_FALSE(none.met_floor);
  EXPECT_EQ(none.warnings.size(), 1U);
  EXPECT_EQ(none.best, 1U);

  EXPECT_THROW((void)tune(std::span<const FilterParams>{}, corpus), InvalidArgumentError);
  const std::vector<FilterParams> mixed{RorParams{}, DrorParams{}};
  EXPECT_THROW((void)tune(mixed, corpus), InvalidArgumentError);
}

TEST(Tune, PicksADominatingEntry) {
  const auto corpus = small_corpus();
  // Removing everything has recall 1; keeping everything has no precision.
  const std::vector<FilterParams> grid{RorParams{1000.0, 1}, RorParams{1e-6, 1},
                                       RorParams{1000.0, 2}};
  const TuneResult t = tune(grid, corpus, {0.0, 1});
  EXPECT_TRUE(t.met_floor);
  EXPECT_EQ(t.best, 1U);
}

TEST(Grids, ExpandSizes) {
  EXPECT_EQ(expand(DsorGrid{}).size(), 30U);
  EXPECT_EQ(expand(SorGrid{}).size(), 5U);
  EXPECT_EQ(expand(DrorGrid{}).size(), 60U);
  EXPECT_EQ(expand(RorGrid{}).size(), 16U);
  EXPECT_TRUE(params_less(DsorParams{12, 0.5, 0.1}, DsorParams{12, 1.0, 0.01}));
  EXPECT_FALSE(params_less(DsorParams{12, 1.0, 0.01}, DsorParams{12, 1.0, 0.01}));
}

}  // namespace
}  // namespace dsor
