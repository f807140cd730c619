// Copyright 2026 The DSOR Toolkit Authors
// SPDX-License-Identifier: Apache-2.0

#include "dsor/filters.hpp"

#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>

#include "dsor/parallel.hpp"

namespace dsor {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Neumaier compensated summation; the input order is fixed (point order), so
// the result does not depend on how the per-point work was scheduled.
class CompensatedSum {
 public:
  void add(double v) noexcept {
    const double t = sum_ + v;
    if (std::abs(sum_) >= std::abs(v)) {
      comp_ += (sum_ - t) + v;
    } else {
      comp_ += (v - t) + sum_;
    }
    sum_ = t;
  }
  [[nodiscard]] double value() const noexcept { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

void finalize_counts(FilterResult& result) {
  result.kept_count = 0;
  for (const auto k : result.keep_mask) {
    result.kept_count += k;
  }
  result.removed_count = result.keep_mask.size() - result.kept_count;
}

FilterResult sized_result(std::size_t n) {
  FilterResult result;
  result.keep_mask.assign(n, 0);
  result.mean_knn_distance.assign(n, kNaN);
  result.range.assign(n, 0.0);
  result.threshold.assign(n, 0.0);
  return result;
}

void require_statistical_cloud(const PointCloud& cloud) {
  if (cloud.size() < 2) {
    throw DegenerateCloudError("statistical filters need at least 2 points, got " +
                               std::to_string(cloud.size()));
  }
}

void check_lengths(const PointCloud& cloud, std::span<const double> mean_distances) {
  if (cloud.size() != mean_distances.size()) {
    throw LengthMismatchError("mean distance count " + std::to_string(mean_distances.size()) +
                              " does not match point count " + std::to_string(cloud.size()));
  }
}

std::optional<std::string> clamp_warning(std::size_t k, std::size_t n) {
  if (n >= 1 && k > n - 1) {
    return "k=" + std::to_string(k) + " exceeds the " + std::to_string(n - 1) +
           " available neighbors; using k=" + std::to_string(n - 1);
  }
  return std::nullopt;
}

}  // namespace

void SorParams::validate() const {
  if (k < 1) {
    throw InvalidArgumentError("SOR: k must be >= 1");
  }
  if (!std::isfinite(s)) {
    throw InvalidArgumentError("SOR: s must be finite");
  }
}

void RorParams::validate() const {
  if (!(radius > 0.0) || !std::isfinite(radius)) {
    throw InvalidArgumentError("ROR: radius must be positive");
  }
  if (min_neighbors < 1) {
    throw InvalidArgumentError("ROR: min_neighbors must be >= 1");
  }
}

void DrorParams::validate() const {
  if (!(azimuth_resolution > 0.0) || !(beta > 0.0) || !(sr_min > 0.0) ||
      !std::isfinite(azimuth_resolution) || !std::isfinite(beta) || !std::isfinite(sr_min)) {
    throw InvalidArgumentError("DROR: azimuth_resolution, beta and sr_min must be positive");
  }
  if (min_neighbors < 1) {
    throw InvalidArgumentError("DROR: min_neighbors must be >= 1");
  }
}

void DsorParams::validate() const {
  if (k < 1) {
    throw InvalidArgumentError("DSOR: k must be >= 1");
  }
  if (!std::isfinite(s)) {
    throw InvalidArgumentError("DSOR: s must be finite");
  }
  if (!(r > 0.0) || !std::isfinite(r)) {
    throw InvalidArgumentError("DSOR: r must be positive");
  }
}

FilterKind kind_of(const FilterParams& params) noexcept {
  return static_cast<FilterKind>(params.index());
}

std::string_view filter_name(FilterKind kind) noexcept {
  switch (kind) {
    case FilterKind::kSor:
      return "sor";
    case FilterKind::kRor:
      return "ror";
    case FilterKind::kDror:
      return "dror";
    case FilterKind::kDsor:
      return "dsor";
  }
  return "unknown";
}

std::optional<FilterKind> parse_filter_kind(std::string_view name) noexcept {
  for (auto kind : {FilterKind::kSor, FilterKind::kRor, FilterKind::kDror, FilterKind::kDsor}) {
    if (filter_name(kind) == name) {
      return kind;
    }
  }
  return std::nullopt;
}

FilterParams default_params(FilterKind kind) {
  switch (kind) {
    case FilterKind::kSor:
      return SorParams{};
    case FilterKind::kRor:
      return RorParams{};
    case FilterKind::kDror:
      return DrorParams{};
    case FilterKind::kDsor:
      break;
  }
  return DsorParams{};
}

std::string describe(const FilterParams& params) {
  std::ostringstream out;
  out << std::setprecision(10);
  std::visit(
      [&](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, SorParams>) {
          out << "k=" << p.k << " s=" << p.s;
        } else if constexpr (std::is_same_v<T, RorParams>) {
          out << "radius=" << p.radius << " min_neighbors=" << p.min_neighbors;
        } else if constexpr (std::is_same_v<T, DrorParams>) {
          out << "azimuth_resolution=" << p.azimuth_resolution << " beta=" << p.beta
              << " sr_min=" << p.sr_min << " min_neighbors=" << p.min_neighbors;
        } else {
          out << "k=" << p.k << " s=" << p.s << " r=" << p.r;
        }
      },
      params);
  return out.str();
}

std::vector<double> mean_knn_distances(const SpatialIndex& index, std::size_t k,
                                       const FilterOptions& options) {
  const std::size_t n = index.size();
  if (n < 2) {
    throw DegenerateCloudError("mean kNN distance needs at least 2 points, got " +
                               std::to_string(n));
  }
  if (k < 1) {
    throw InvalidArgumentError("k must be >= 1");
  }
  std::vector<double> means(n);
  const auto& order = index.traversal_order();
  const unsigned workers = resolve_threads(options.threads);
  if (workers <= 1) {
    std::vector<SquaredNeighbor> buf;
    for (const std::uint32_t i : order) {
      index.knn_squared(i, k, buf);
      double sum = 0.0;
      for (const auto& nb : buf) {
        sum += std::sqrt(nb.squared_distance);
      }
      means[i] = sum / static_cast<double>(buf.size());
    }
    return means;
  }
  parallel_for(n, workers, [&](std::size_t t) {
    thread_local std::vector<SquaredNeighbor> buf;
    const std::size_t i = order[t];
    index.knn_squared(i, k, buf);
    double sum = 0.0;
    for (const auto& nb : buf) {
      sum += std::sqrt(nb.squared_distance);
    }
    means[i] = sum / static_cast<double>(buf.size());
  });
  return means;
}

std::vector<double> mean_knn_distances(const PointCloud& cloud, std::size_t k,
                                       const FilterOptions& options) {
  require_statistical_cloud(cloud);
  return mean_knn_distances(SpatialIndex(cloud), k, options);
}

GlobalStats global_threshold(std::span<const double> mean_distances, double s) {
  if (mean_distances.empty()) {
    throw InvalidArgumentError("global threshold of an empty distance list");
  }
  CompensatedSum sum;
  for (const double d : mean_distances) {
    if (!std::isfinite(d)) {
      throw InvalidArgumentError("non-finite mean distance");
    }
    sum.add(d);
  }
  const auto n = static_cast<double>(mean_distances.size());
  GlobalStats stats;
  stats.mu = sum.value() / n;
  if (mean_distances.size() > 1) {
    CompensatedSum sq;
    for (const double d : mean_distances) {
      const double dev = d - stats.mu;
      sq.add(dev * dev);
    }
    stats.sigma = std::sqrt(sq.value() / (n - 1.0));
  }
  stats.t_g = stats.mu + stats.sigma * s;
  return stats;
}

FilterResult sor_decide(const PointCloud& cloud, std::span<const double> mean_distances,
                        double s) {
  check_lengths(cloud, mean_distances);
  const GlobalStats stats = global_threshold(mean_distances, s);
  FilterResult result = sized_result(cloud.size());
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    result.mean_knn_distance[i] = mean_distances[i];
    result.range[i] = cloud[i].range();
    result.threshold[i] = stats.t_g;
    // Strict: a point exactly at the threshold is an outlier.
    result.keep_mask[i] = mean_distances[i] < stats.t_g ? 1 : 0;
  }
  result.stats = stats;
  finalize_counts(result);
  return result;
}

FilterResult dsor_decide(const PointCloud& cloud, std::span<const double> mean_distances,
                         double s, double r) {
  check_lengths(cloud, mean_distances);
  const GlobalStats stats = global_threshold(mean_distances, s);
  FilterResult result = sized_result(cloud.size());
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const double distance = cloud[i].range();
    const double dynamic_threshold = stats.t_g * r * distance;
    result.mean_knn_distance[i] = mean_distances[i];
    result.range[i] = distance;
    result.threshold[i] = dynamic_threshold;
    result.keep_mask[i] = mean_distances[i] < dynamic_threshold ? 1 : 0;
  }
  result.stats = stats;
  finalize_counts(result);
  return result;
}

FilterResult sor_filter(const PointCloud& cloud, const SorParams& params,
                        const FilterOptions& options) {
  params.validate();
  require_statistical_cloud(cloud);
  const SpatialIndex index(cloud);
  const auto means = mean_knn_distances(index, params.k, options);
  FilterResult result = sor_decide(cloud, means, params.s);
  if (auto w = clamp_warning(params.k, cloud.size())) {
    result.warnings.push_back(*w);
  }
  return result;
}

FilterResult dsor_filter(const PointCloud& cloud, const DsorParams& params,
                         const FilterOptions& options) {
  params.validate();
  require_statistical_cloud(cloud);
  const SpatialIndex index(cloud);
  const auto means = mean_knn_distances(index, params.k, options);
  FilterResult result = dsor_decide(cloud, means, params.s, params.r);
  if (auto w = clamp_warning(params.k, cloud.size())) {
    result.warnings.push_back(*w);
  }
  return result;
}

FilterResult ror_filter(const PointCloud& cloud, const RorParams& params,
                        const FilterOptions& options) {
  params.validate();
  FilterResult result = sized_result(cloud.size());
  if (cloud.empty()) {
    return result;
  }
  const SpatialIndex index(cloud);
  const auto& order = index.traversal_order();
  parallel_for(cloud.size(), options.threads, [&](std::size_t t) {
    const std::size_t i = order[t];
    result.range[i] = cloud[i].range();
    result.threshold[i] = params.radius;
    result.keep_mask[i] = index.radius_count(i, params.radius) >= params.min_neighbors ? 1 : 0;
  });
  finalize_counts(result);
  return result;
}

FilterResult dror_filter(const PointCloud& cloud, const DrorParams& params,
                         const FilterOptions& options) {
  params.validate();
  FilterResult result = sized_result(cloud.size());
  if (cloud.empty()) {
    return result;
  }
  const SpatialIndex index(cloud);
  const double radius_per_meter = params.beta * params.azimuth_resolution;
  const auto& order = index.traversal_order();
  parallel_for(cloud.size(), options.threads, [&](std::size_t t) {
    const std::size_t i = order[t];
    const double range_xy = cloud[i].horizontal_range();
    const double search_radius = std::max(params.sr_min, radius_per_meter * range_xy);
    result.range[i] = range_xy;
    result.threshold[i] = search_radius;
    result.keep_mask[i] = index.radius_count(i, search_radius) >= params.min_neighbors ? 1 : 0;
  });
  finalize_counts(result);
  return result;
}

FilterResult apply_filter(const PointCloud& cloud, const FilterParams& params,
                          const FilterOptions& options) {
  return std::visit(
      [&](const auto& p) -> FilterResult {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, SorParams>) {
          return sor_filter(cloud, p, options);
        } else if constexpr (std::is_same_v<T, RorParams>) {
          return ror_filter(cloud, p, options);
        } else if constexpr (std::is_same_v<T, DrorParams>) {
          return dror_filter(cloud, p, options);
        } else {
          return dsor_filter(cloud, p, options);
        }
      },
      params);
}

OrderStatistics neighbor_order_statistics(const SpatialIndex& index, std::size_t max_m,
                                          const FilterOptions& options) {
  if (max_m < 1) {
    throw InvalidArgumentError("order statistics need max_m >= 1");
  }
  OrderStatistics order;
  order.max_m = max_m;
  order.squared.assign(index.size() * max_m, std::numeric_limits<double>::infinity());
  const auto& traversal = index.traversal_order();
  parallel_for(index.size(), options.threads, [&](std::size_t t) {
    thread_local std::vector<SquaredNeighbor> buf;
    const std::size_t i = traversal[t];
    index.knn_squared(i, max_m, buf);
    for (std::size_t m = 0; m < buf.size(); ++m) {
      order.squared[i * max_m + m] = buf[m].squared_distance;
    }
  });
  return order;
}

FilterResult ror_decide(const PointCloud& cloud, const OrderStatistics& order,
                        const RorParams& params) {
  params.validate();
  if (params.min_neighbors > order.max_m) {
    throw InvalidArgumentError("order statistics computed for m <= " +
                               std::to_string(order.max_m));
  }
  FilterResult result = sized_result(cloud.size());
  const double r2 = params.radius * params.radius;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    result.range[i] = cloud[i].range();
    result.threshold[i] = params.radius;
    result.keep_mask[i] = order.at(i, params.min_neighbors) <= r2 ? 1 : 0;
  }
  finalize_counts(result);
  return result;
}

FilterResult dror_decide(const PointCloud& cloud, const OrderStatistics& order,
                         const DrorParams& params) {
  params.validate();
  if (params.min_neighbors > order.max_m) {
    throw InvalidArgumentError("order statistics computed for m <= " +
                               std::to_string(order.max_m));
  }
  FilterResult result = sized_result(cloud.size());
  const double radius_per_meter = params.beta * params.azimuth_resolution;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const double range_xy = cloud[i].horizontal_range();
    const double search_radius = std::max(params.sr_min, radius_per_meter * range_xy);
    result.range[i] = range_xy;
    result.threshold[i] = search_radius;
    result.keep_mask[i] =
        order.at(i, params.min_neighbors) <= search_radius * search_radius ? 1 : 0;
  }
  finalize_counts(result);
  return result;
}

PointCloud extract(const PointCloud& cloud, const FilterResult& result, Subset which) {
  if (cloud.size() != result.size()) {
    throw LengthMismatchError("mask length " + std::to_string(result.size()) +
                              " does not match point count " + std::to_string(cloud.size()));
  }
  const std::uint8_t want = which == Subset::kKept ? 1 : 0;
  PointCloud out;
  out.frame_id = cloud.frame_id;
  out.points.reserve(which == Subset::kKept ? result.kept_count : result.removed_count);
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    if (result.keep_mask[i] == want) {
      out.points.push_back(cloud[i]);
    }
  }
  return out;
}

}  // namespace dsor
