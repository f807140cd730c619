// Copyright 2026 The DSOR Toolkit Authors
// SPDX-License-Identifier: Apache-2.0

#include "dsor/eval.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <tuple>

#include "dsor/parallel.hpp"
#include "dsor/philox.hpp"
#include "dsor/spatial_index.hpp"

namespace dsor {

std::optional<double> Confusion::precision() const noexcept {
  if (tp + fp == 0) {
    return std::nullopt;
  }
  return static_cast<double>(tp) / static_cast<double>(tp + fp);
}

std::optional<double> Confusion::recall() const noexcept {
  if (tp + fn == 0) {
    return std::nullopt;
  }
  return static_cast<double>(tp) / static_cast<double>(tp + fn);
}

Confusion& Confusion::operator+=(const Confusion& o) noexcept {
  tp += o.tp;
  fp += o.fp;
  fn += o.fn;
  tn += o.tn;
  return *this;
}

std::optional<double> RangeBin::pct_removed() const noexcept {
  if (total == 0) {
    return std::nullopt;
  }
  return static_cast<double>(removed) / static_cast<double>(total);
}

namespace {

Confusion confusion_from_mask(const LabeledCloud& labeled, std::span<const std::uint8_t> mask) {
  if (mask.size() != labeled.size()) {
    throw LengthMismatchError("mask length " + std::to_string(mask.size()) +
                              " does not match point count " + std::to_string(labeled.size()));
  }
  Confusion c;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    const bool removed = mask[i] == 0;
    const bool snow = labeled.is_snow(i);
    if (removed) {
      (snow ? c.tp : c.fp) += 1;
    } else {
      (snow ? c.fn : c.tn) += 1;
    }
  }
  return c;
}

}  // namespace

Confusion confusion_of(const LabeledCloud& labeled, const FilterResult& result) {
  return confusion_from_mask(labeled, result.keep_mask);
}

RangeHistogram range_histogram(const PointCloud& cloud, const FilterResult& result,
                               double bin_width, double max_range) {
  if (!(bin_width > 0.0) || !std::isfinite(bin_width)) {
    throw InvalidArgumentError("bin_width must be positive");
  }
  if (!(max_range > 0.0) || !std::isfinite(max_range)) {
    throw InvalidArgumentError("histogram max_range must be positive");
  }
  if (cloud.size() != result.size()) {
    throw LengthMismatchError("mask length " + std::to_string(result.size()) +
                              " does not match point count " + std::to_string(cloud.size()));
  }
  const auto regular = static_cast<std::size_t>(std::ceil(max_range / bin_width));
  RangeHistogram bins(regular + 1);
  for (std::size_t b = 0; b < regular; ++b) {
    bins[b].bin_start = static_cast<double>(b) * bin_width;
    bins[b].bin_end = std::min(max_range, static_cast<double>(b + 1) * bin_width);
  }
  bins[regular].bin_start = max_range;
  bins[regular].bin_end = std::numeric_limits<double>::infinity();

  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const double range = cloud[i].range();
    std::size_t b = regular;
    if (range < max_range) {
      b = std::min(regular - 1, static_cast<std::size_t>(range / bin_width));
    }
    bins[b].total += 1;
    bins[b].removed += result.kept(i) ? 0 : 1;
  }
  return bins;
}

EvalReport score(const LabeledCloud& labeled, const FilterResult& result, double bin_width,
                 double max_range) {
  EvalReport report;
  report.confusion = confusion_of(labeled, result);
  report.range_histogram = range_histogram(labeled.cloud(), result, bin_width, max_range);
  return report;
}

EvalReport aggregate(std::span<const EvalReport> reports, std::string name) {
  EvalReport total;
  total.name = std::move(name);
  for (const auto& r : reports) {
    total.confusion += r.confusion;
    if (total.range_histogram.empty()) {
      total.range_histogram = r.range_histogram;
      continue;
    }
    if (r.range_histogram.size() != total.range_histogram.size()) {
      throw LengthMismatchError("cannot aggregate histograms with different binning");
    }
    for (std::size_t b = 0; b < r.range_histogram.size(); ++b) {
      if (r.range_histogram[b].bin_start != total.range_histogram[b].bin_start) {
        throw LengthMismatchError("cannot aggregate histograms with different binning");
      }
      total.range_histogram[b].total += r.range_histogram[b].total;
      total.range_histogram[b].removed += r.range_histogram[b].removed;
    }
  }
  if (!reports.empty()) {
    total.params_used = reports.front().params_used;
  }
  return total;
}

// --- timing ----------------------------------------------------------------

void summarize(TimingStats& stats) {
  const auto& s = stats.samples_ms;
  stats.measurements = s.size();
  if (s.empty()) {
    return;
  }
  const double n = static_cast<double>(s.size());
  stats.mean_ms = std::accumulate(s.begin(), s.end(), 0.0) / n;
  double sq = 0.0;
  for (const double v : s) {
    sq += (v - stats.mean_ms) * (v - stats.mean_ms);
  }
  stats.stddev_ms = s.size() > 1 ? std::sqrt(sq / (n - 1.0)) : 0.0;
  std::vector<double> sorted = s;
  std::sort(sorted.begin(), sorted.end());
  const std::size_t mid = sorted.size() / 2;
  stats.median_ms = sorted.size() % 2 == 1 ? sorted[mid] : 0.5 * (sorted[mid - 1] + sorted[mid]);
}

namespace {

double time_once(const PointCloud& cloud, const FilterParams& params, unsigned threads) {
  using Clock = std::chrono::steady_clock;
  const FilterOptions options{threads};
  const auto start = Clock::now();
  const FilterResult result = apply_filter(cloud, params, options);
  const auto stop = Clock::now();
  // Keep the result observable so the call cannot be elided.
  volatile std::size_t sink = result.kept_count;
  (void)sink;
  return std::chrono::duration<double, std::milli>(stop - start).count();
}

}  // namespace

TimingStats benchmark(const FilterParams& params, std::span<const PointCloud> clouds,
                      const BenchmarkOptions& options) {
  if (clouds.empty()) {
    throw InvalidArgumentError("benchmark needs at least one cloud");
  }
  if (options.reps < 1) {
    throw InvalidArgumentError("benchmark needs reps >= 1");
  }
  TimingStats stats;
  stats.filter = std::string(filter_name(kind_of(params)));
  stats.params = describe(params);
  stats.reps = options.reps;
  stats.warmup = options.warmup;
  stats.threads = resolve_threads(options.threads);

  for (std::size_t w = 0; w < options.warmup; ++w) {
    (void)time_once(clouds.front(), params, options.threads);
  }
  double points = 0.0;
  for (const auto& cloud : clouds) {
    points += static_cast<double>(cloud.size());
    for (std::size_t r = 0; r < options.reps; ++r) {
      stats.samples_ms.push_back(time_once(cloud, params, options.threads));
    }
  }
  stats.mean_cloud_size = points / static_cast<double>(clouds.size());
  summarize(stats);
  return stats;
}

// --- scalability -------------------------------------------------------------

PointCloud subsample(const PointCloud& cloud, double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0) || fraction > 1.0) {
    throw InvalidArgumentError("subsample fraction must be in (0, 1]");
  }
  const std::size_t n = cloud.size();
  const auto m = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n)));
  if (m >= n) {
    return cloud;
  }
  // Rank points by a per-index random key; the m smallest keys form the
  // subset. Ties are broken by index.
  const CounterRng rng(seed, RngStream::kSubsample);
  std::vector<std::pair<std::uint64_t, std::uint32_t>> keys(n);
  for (std::size_t i = 0; i < n; ++i) {
    keys[i] = {rng.bits64(i), static_cast<std::uint32_t>(i)};
  }
  std::nth_element(keys.begin(), keys.begin() + static_cast<std::ptrdiff_t>(m), keys.end());
  std::vector<std::uint32_t> chosen(m);
  for (std::size_t j = 0; j < m; ++j) {
    chosen[j] = keys[j].second;
  }
  std::sort(chosen.begin(), chosen.end());
  PointCloud out;
  out.frame_id = cloud.frame_id;
  out.points.reserve(m);
  for (const auto i : chosen) {
    out.points.push_back(cloud[i]);
  }
  return out;
}

ScalingFit fit_power_law(std::span<const ScalingSample> samples) {
  if (samples.size() < 3) {
    throw InvalidArgumentError("power-law fit needs at least 3 samples");
  }
  std::vector<double> lx;
  std::vector<double> ly;
  for (const auto& s : samples) {
    if (s.n == 0 || !(s.time_ms > 0.0)) {
      throw InvalidArgumentError("power-law fit needs positive sizes and times");
    }
    lx.push_back(std::log(static_cast<double>(s.n)));
    ly.push_back(std::log(s.time_ms));
  }
  const double n = static_cast<double>(lx.size());
  const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / n;
  const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / n;
  double sxx = 0.0;
  double sxy = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
    syy += (ly[i] - my) * (ly[i] - my);
  }
  if (sxx <= 0.0) {
    throw InvalidArgumentError("power-law fit is degenerate: all sample sizes are equal");
  }
  ScalingFit fit;
  fit.samples.assign(samples.begin(), samples.end());
  fit.exponent = sxy / sxx;
  const double intercept = my - fit.exponent * mx;
  fit.coefficient = std::exp(intercept);
  double ss_res = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    const double r = ly[i] - (intercept + fit.exponent * lx[i]);
    fit.residuals.push_back(r);
    ss_res += r * r;
  }
  fit.r_squared = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
  return fit;
}

CostFunction filter_cost(const FilterParams& params, unsigned threads) {
  return [params, threads](const PointCloud& cloud) { return time_once(cloud, params, threads); };
}

ScalingFit scalability_study(const PointCloud& cloud, std::span<const double> fractions,
                             std::size_t reps, std::uint64_t seed, const CostFunction& cost) {
  if (fractions.size() < 3) {
    throw InvalidArgumentError("scalability study needs at least 3 fractions");
  }
  if (reps < 1) {
    throw InvalidArgumentError("scalability study needs reps >= 1");
  }
  std::vector<ScalingSample> samples;
  for (const double f : fractions) {
    const PointCloud sub = subsample(cloud, f, seed);
    std::vector<double> times;
    for (std::size_t r = 0; r < reps; ++r) {
      times.push_back(cost(sub));
    }
    std::sort(times.begin(), times.end());
    const std::size_t mid = times.size() / 2;
    const double median = times.size() % 2 == 1 ? times[mid] : 0.5 * (times[mid - 1] + times[mid]);
    samples.push_back({sub.size(), median});
  }
  return fit_power_law(samples);
}

std::vector<double> linspace_fractions(double first, double last, std::size_t n) {
  if (n < 1) {
    throw InvalidArgumentError("linspace needs n >= 1");
  }
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = n == 1 ? first
                    : first + (last - first) * static_cast<double>(i) / static_cast<double>(n - 1);
  }
  return out;
}

// --- tuning --------------------------------------------------------------------

namespace {

auto as_tuple(const SorParams& p) { return std::make_tuple(p.k, p.s); }
auto as_tuple(const RorParams& p) { return std::make_tuple(p.radius, p.min_neighbors); }
auto as_tuple(const DrorParams& p) {
  return std::make_tuple(p.azimuth_resolution, p.beta, p.sr_min, p.min_neighbors);
}
auto as_tuple(const DsorParams& p) { return std::make_tuple(p.k, p.s, p.r); }

// Per-cloud confusion for every grid entry, sharing neighbor searches.
std::vector<Confusion> score_grid_on_cloud(std::span<const FilterParams> grid,
                                           const LabeledCloud& labeled) {
  const PointCloud& cloud = labeled.cloud();
  std::vector<Confusion> out(grid.size());
  const FilterKind kind = kind_of(grid.front());

  if (kind == FilterKind::kSor || kind == FilterKind::kDsor) {
    if (cloud.size() < 2) {
      throw DegenerateCloudError("statistical filters need at least 2 points");
    }
    const SpatialIndex index(cloud);
    std::map<std::size_t, std::vector<double>> means_by_k;
    for (std::size_t g = 0; g < grid.size(); ++g) {
      const std::size_t k = kind == FilterKind::kSor ? std::get<SorParams>(grid[g]).k
                                                     : std::get<DsorParams>(grid[g]).k;
      auto it = means_by_k.find(k);
      if (it == means_by_k.end()) {
        it = means_by_k.emplace(k, mean_knn_distances(index, k)).first;
      }
      const FilterResult result =
          kind == FilterKind::kSor
              ? sor_decide(cloud, it->second, std::get<SorParams>(grid[g]).s)
              : dsor_decide(cloud, it->second, std::get<DsorParams>(grid[g]).s,
                            std::get<DsorParams>(grid[g]).r);
      out[g] = confusion_of(labeled, result);
    }
    return out;
  }

  std::size_t max_m = 1;
  for (const auto& p : grid) {
    max_m = std::max(max_m, kind == FilterKind::kRor ? std::get<RorParams>(p).min_neighbors
                                                     : std::get<DrorParams>(p).min_neighbors);
  }
  if (cloud.empty()) {
    return out;
  }
  const SpatialIndex index(cloud);
  const OrderStatistics order = neighbor_order_statistics(index, max_m);
  for (std::size_t g = 0; g < grid.size(); ++g) {
    const FilterResult result = kind == FilterKind::kRor
                                    ? ror_decide(cloud, order, std::get<RorParams>(grid[g]))
                                    : dror_decide(cloud, order, std::get<DrorParams>(grid[g]));
    out[g] = confusion_of(labeled, result);
  }
  return out;
}

}  // namespace

bool params_less(const FilterParams& a, const FilterParams& b) {
  if (a.index() != b.index()) {
    return a.index() < b.index();
  }
  return std::visit(
      [&](const auto& pa) {
        using T = std::decay_t<decltype(pa)>;
        return as_tuple(pa) < as_tuple(std::get<T>(b));
      },
      a);
}

TuneResult tune(std::span<const FilterParams> grid, std::span<const LabeledCloud> corpus,
                const TuneOptions& options) {
  if (grid.empty()) {
    throw InvalidArgumentError("tuning grid is empty");
  }
  if (corpus.empty()) {
    throw InvalidArgumentError("tuning corpus is empty");
  }
  const FilterKind kind = kind_of(grid.front());
  for (const auto& p : grid) {
    if (kind_of(p) != kind) {
      throw InvalidArgumentError("tuning grid mixes filter kinds");
    }
    std::visit([](const auto& q) { q.validate(); }, p);
  }

  std::vector<std::vector<Confusion>> per_cloud(corpus.size());
  parallel_for(corpus.size(), options.threads,
               [&](std::size_t c) { per_cloud[c] = score_grid_on_cloud(grid, corpus[c]); });

  TuneResult result;
  result.precision_floor = options.precision_floor;
  result.candidates.reserve(grid.size());
  for (std::size_t g = 0; g < grid.size(); ++g) {
    TuneCandidate cand{grid[g], {}};
    for (const auto& cloud_scores : per_cloud) {
      cand.confusion += cloud_scores[g];
    }
    result.candidates.push_back(std::move(cand));
  }

  auto precision = [](const TuneCandidate& c) { return c.confusion.precision().value_or(0.0); };
  auto recall = [](const TuneCandidate& c) { return c.confusion.recall().value_or(0.0); };

  std::optional<std::size_t> best;
  for (std::size_t g = 0; g < result.candidates.size(); ++g) {
    const auto& c = result.candidates[g];
    if (!c.confusion.precision() || *c.confusion.precision() < options.precision_floor) {
      continue;
    }
    if (!best) {
      best = g;
      continue;
    }
    const auto& b = result.candidates[*best];
    if (recall(c) > recall(b) ||
        (recall(c) == recall(b) && params_less(c.params, b.params))) {
      best = g;
    }
  }
  if (best) {
    result.best = *best;
    result.met_floor = true;
    return result;
  }

  result.met_floor = false;
  std::size_t fallback = 0;
  for (std::size_t g = 1; g < result.candidates.size(); ++g) {
    const auto& c = result.candidates[g];
    const auto& b = result.candidates[fallback];
    if (precision(c) > precision(b) ||
        (precision(c) == precision(b) &&
         (recall(c) > recall(b) ||
          (recall(c) == recall(b) && params_less(c.params, b.params))))) {
      fallback = g;
    }
  }
  result.best = fallback;
  result.warnings.push_back("no grid entry reached precision " +
                            std::to_string(options.precision_floor) +
                            "; returning the highest-precision entry");
  return result;
}

std::vector<FilterParams> expand(const DsorGrid& grid) {
  std::vector<FilterParams> out;
  for (const auto k : grid.k) {
    for (const auto s : grid.s) {
      for (const auto r : grid.r) {
        out.emplace_back(DsorParams{k, s, r});
      }
    }
  }
  return out;
}

std::vector<FilterParams> expand(const SorGrid& grid) {
  std::vector<FilterParams> out;
  for (const auto k : grid.k) {
    for (const auto s : grid.s) {
      out.emplace_back(SorParams{k, s});
    }
  }
  return out;
}

std::vector<FilterParams> expand(const DrorGrid& grid) {
  std::vector<FilterParams> out;
  for (const auto az : grid.azimuth_resolution) {
    for (const auto beta : grid.beta) {
      for (const auto sr_min : grid.sr_min) {
        for (const auto m : grid.min_neighbors) {
          out.emplace_back(DrorParams{az, beta, sr_min, m});
        }
      }
    }
  }
  return out;
}

std::vector<FilterParams> expand(const RorGrid& grid) {
  std::vector<FilterParams> out;
  for (const auto radius : grid.radius) {
    for (const auto m : grid.min_neighbors) {
      out.emplace_back(RorParams{radius, m});
    }
  }
  return out;
}

std::vector<FilterParams> default_grid(FilterKind kind) {
  switch (kind) {
    case FilterKind::kSor:
      return expand(SorGrid{});
    case FilterKind::kRor:
      return expand(RorGrid{});
    case FilterKind::kDror:
      return expand(DrorGrid{});
    case FilterKind::kDsor:
      break;
  }
  return expand(DsorGrid{});
}

}  // namespace dsor
