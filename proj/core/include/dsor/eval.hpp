// Copyright 2026 The DSOR Toolkit Authors
// SPDX-License-Identifier: Apache-2.0
//
// Evaluation harness: precision/recall against point-wise labels,
// percent-removed-by-range histograms, wall-clock timing, subsampling
// scalability with power-law fits, and grid-search tuning.
//
// The positive class is "removed by the filter"; a true positive is a removed
// point whose semantic class is in the cloud's snow class set.

#ifndef DSOR_EVAL_HPP_
#define DSOR_EVAL_HPP_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dsor/filters.hpp"
#include "dsor/point_cloud.hpp"

namespace dsor {

struct Confusion {
  std::size_t tp = 0;  ///< removed, snow
  std::size_t fp = 0;  ///< removed, environment
  std::size_t fn = 0;  ///< kept, snow
  std::size_t tn = 0;  ///< kept, environment

  [[nodiscard]] std::size_t total() const noexcept { return tp + fp + fn + tn; }
  /// tp / (tp + fp); nullopt when nothing was removed.
  [[nodiscard]] std::optional<double> precision() const noexcept;
  /// tp / (tp + fn); nullopt when there is no snow.
  [[nodiscard]] std::optional<double> recall() const noexcept;

  Confusion& operator+=(const Confusion& o) noexcept;
  friend bool operator==(const Confusion&, const Confusion&) = default;
};

struct RangeBin {
  double bin_start = 0.0;  ///< meters
  double bin_end = 0.0;    ///< meters; +inf for the overflow bin
  std::size_t total = 0;
  std::size_t removed = 0;

  /// removed / total; nullopt for an empty bin.
  [[nodiscard]] std::optional<double> pct_removed() const noexcept;
  friend bool operator==(const RangeBin&, const RangeBin&) = default;
};

using RangeHistogram = std::vector<RangeBin>;

inline constexpr double kDefaultBinWidth = 5.0;
inline constexpr double kDefaultHistogramRange = 80.0;

struct EvalReport {
  std::string name;  ///< cloud stem or "aggregate"
  Confusion confusion;
  RangeHistogram range_histogram;
  std::string params_used;

  [[nodiscard]] std::optional<double> precision() const noexcept { return confusion.precision(); }
  [[nodiscard]] std::optional<double> recall() const noexcept { return confusion.recall(); }
};

[[nodiscard]] Confusion confusion_of(const LabeledCloud& labeled, const FilterResult& result);

/// Histogram of points by 3-D range in [b, b + bin_width) bins covering
/// [0, max_range), plus a final overflow bin [max_range, inf). Throws
/// InvalidArgumentError for a non-positive bin width.
[[nodiscard]] RangeHistogram range_histogram(const PointCloud& cloud, const FilterResult& result,
                                             double bin_width = kDefaultBinWidth,
                                             double max_range = kDefaultHistogramRange);

[[nodiscard]] EvalReport score(const LabeledCloud& labeled, const FilterResult& result,
                               double bin_width = kDefaultBinWidth,
                               double max_range = kDefaultHistogramRange);

/// Sums confusions and bin counts; histograms must share a binning.
[[nodiscard]] EvalReport aggregate(std::span<const EvalReport> reports, std::string name = "aggregate");

// --- timing --------------------------------------------------------------

struct TimingStats {
  std::string filter;
  std::string params;
  double mean_ms = 0.0;
  double stddev_ms = 0.0;  ///< sample standard deviation; 0 for one measurement
  double median_ms = 0.0;
  std::size_t reps = 0;
  std::size_t warmup = 0;
  std::size_t measurements = 0;
  double mean_cloud_size = 0.0;  ///< points
  unsigned threads = 1;
  std::vector<double> samples_ms;
};

struct BenchmarkOptions {
  std::size_t reps = 1;
  std::size_t warmup = 1;  ///< discarded runs on the first cloud before measuring
  unsigned threads = 1;    ///< passed to the filter
};

/// Times apply_filter (index construction included) on every cloud, reps
/// times each, with a monotonic clock. Throws on an empty cloud list.
[[nodiscard]] TimingStats benchmark(const FilterParams& params, std::span<const PointCloud> clouds,
                                    const BenchmarkOptions& options = {});

/// mean, sample stddev and median of a set of measurements.
void summarize(TimingStats& stats);

// --- scalability ---------------------------------------------------------

/// Uniform random subset of round(fraction * N) points in input order,
/// deterministic in `seed`. Throws for fraction outside (0, 1].
[[nodiscard]] PointCloud subsample(const PointCloud& cloud, double fraction, std::uint64_t seed);

struct ScalingSample {
  std::size_t n = 0;
  double time_ms = 0.0;
};

/// Least-squares fit of log t = log a + b log N.
struct ScalingFit {
  std::vector<ScalingSample> samples;
  double exponent = 0.0;     ///< b
  double coefficient = 0.0;  ///< a
  double r_squared = 0.0;
  std::vector<double> residuals;  ///< log-space, per sample
};

/// Throws InvalidArgumentError for fewer than 3 samples, non-positive values,
/// or when all N are equal.
[[nodiscard]] ScalingFit fit_power_law(std::span<const ScalingSample> samples);

/// Cost of processing one cloud, in milliseconds.
using CostFunction = std::function<double(const PointCloud&)>;

/// Wall-clock cost of apply_filter(cloud, params).
[[nodiscard]] CostFunction filter_cost(const FilterParams& params, unsigned threads = 1);

/// Evaluates `cost` on subsample(cloud, f, seed) for every fraction (median
/// of `reps` runs each) and fits the power law.
[[nodiscard]] ScalingFit scalability_study(const PointCloud& cloud, std::span<const double> fractions,
                                           std::size_t reps, std::uint64_t seed,
                                           const CostFunction& cost);

/// n evenly spaced fractions from `first` to `last` inclusive.
[[nodiscard]] std::vector<double> linspace_fractions(double first, double last, std::size_t n);

// --- tuning --------------------------------------------------------------

inline constexpr double kDefaultPrecisionFloor = 0.6;

struct TuneCandidate {
  FilterParams params;
  Confusion confusion;
};

struct TuneResult {
  std::vector<TuneCandidate> candidates;  ///< in grid order
  std::size_t best = 0;                   ///< index into candidates
  bool met_floor = true;
  double precision_floor = kDefaultPrecisionFloor;
  std::vector<std::string> warnings;

  [[nodiscard]] const TuneCandidate& chosen() const { return candidates.at(best); }
};

struct TuneOptions {
  double precision_floor = kDefaultPrecisionFloor;
  unsigned threads = 1;
};

/// Scores every grid entry on the corpus (corpus-level confusion summed over
/// clouds) and picks the highest recall among entries whose precision meets
/// the floor; ties go to the lexicographically smallest parameter tuple. If
/// no entry meets the floor, the highest-precision entry is returned with a
/// warning. All grid entries must be the same filter kind. The expensive
/// neighbor search is shared between entries that differ only in decision
/// parameters, which gives the same masks as running each filter in full.
[[nodiscard]] TuneResult tune(std::span<const FilterParams> grid,
                              std::span<const LabeledCloud> corpus, const TuneOptions& options = {});

/// Cartesian product of per-parameter value lists.
struct DsorGrid {
  std::vector<std::size_t> k{12};
  std::vector<double> s{0.0, 0.5, 1.0, 1.5, 2.0};
  std::vector<double> r{0.01, 0.02, 0.03, 0.05, 0.08, 0.12};
};
struct SorGrid {
  std::vector<std::size_t> k{12};
  std::vector<double> s{-0.5, 0.0, 0.5, 1.0, 2.0};
};
struct DrorGrid {
  std::vector<double> azimuth_resolution{0.2 * std::numbers::pi / 180.0};
  std::vector<double> beta{1.0, 2.0, 3.0, 4.0, 6.0};
  std::vector<double> sr_min{0.02, 0.04, 0.08};
  std::vector<std::size_t> min_neighbors{2, 3, 4, 5};
};
struct RorGrid {
  std::vector<double> radius{0.05, 0.1, 0.2, 0.4};
  std::vector<std::size_t> min_neighbors{2, 3, 4, 5};
};

[[nodiscard]] std::vector<FilterParams> expand(const DsorGrid& grid);
[[nodiscard]] std::vector<FilterParams> expand(const SorGrid& grid);
[[nodiscard]] std::vector<FilterParams> expand(const DrorGrid& grid);
[[nodiscard]] std::vector<FilterParams> expand(const RorGrid& grid);
[[nodiscard]] std::vector<FilterParams> default_grid(FilterKind kind);

/// Lexicographic comparison of two parameter sets of the same kind, in
/// declaration order of their fields.
[[nodiscard]] bool params_less(const FilterParams& a, const FilterParams& b);

}  // namespace dsor

#endif  // DSOR_EVAL_HPP_
