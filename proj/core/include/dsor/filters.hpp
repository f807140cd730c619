// Copyright 2026 The DSOR Toolkit Authors
// SPDX-License-Identifier: Apache-2.0
//
// De-noising filters: statistical outlier removal (SOR), radius outlier
// removal (ROR), dynamic radius outlier removal (DROR) and dynamic
// statistical outlier removal (DSOR).
//
// Every filter is a pure function of (cloud, params) and returns a
// FilterResult: a per-point keep mask plus the per-point quantities the
// decision was based on.

#ifndef DSOR_FILTERS_HPP_
#define DSOR_FILTERS_HPP_

#include <cstddef>
#include <cstdint>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "dsor/point_cloud.hpp"
#include "dsor/spatial_index.hpp"

namespace dsor {

/// Global statistic shared by SOR and DSOR.
struct SorParams {
  std::size_t k = 12;  ///< neighbors averaged per point
  double s = 1.0;      ///< standard-deviation multiplier

  void validate() const;
  friend bool operator==(const SorParams&, const SorParams&) = default;
};

struct RorParams {
  double radius = 0.1;            ///< meters
  std::size_t min_neighbors = 3;  ///< kept iff at least this many others inside radius

  void validate() const;
  friend bool operator==(const RorParams&, const RorParams&) = default;
};

/// Search radius grows with horizontal range:
/// sr = max(sr_min, beta * azimuth_resolution * range_xy).
struct DrorParams {
  double azimuth_resolution = 0.2 * std::numbers::pi / 180.0;  ///< radians
  double beta = 3.0;
  double sr_min = 0.04;  ///< meters
  std::size_t min_neighbors = 3;

  void validate() const;
  friend bool operator==(const DrorParams&, const DrorParams&) = default;
};

/// Threshold grows with range: a point is kept iff its mean kNN distance is
/// below T_g * r * range, with T_g = mu + s * sigma over the whole cloud.
struct DsorParams {
  std::size_t k = 12;
  double s = 1.0;
  double r = 0.05;  ///< per meter of range

  void validate() const;
  friend bool operator==(const DsorParams&, const DsorParams&) = default;
};

using FilterParams = std::variant<SorParams, RorParams, DrorParams, DsorParams>;

enum class FilterKind { kSor, kRor, kDror, kDsor };

[[nodiscard]] FilterKind kind_of(const FilterParams& params) noexcept;
[[nodiscard]] std::string_view filter_name(FilterKind kind) noexcept;
/// Parses "sor", "ror", "dror" or "dsor"; nullopt otherwise.
[[nodiscard]] std::optional<FilterKind> parse_filter_kind(std::string_view name) noexcept;
/// Default-constructed parameters for a filter kind.
[[nodiscard]] FilterParams default_params(FilterKind kind);
/// "k=12 s=1 r=0.05" style rendering, used in reports and logs.
[[nodiscard]] std::string describe(const FilterParams& params);

/// mu/sigma of the per-point mean kNN distances and the global threshold
/// t_g = mu + sigma * s.
struct GlobalStats {
  double mu = 0.0;
  double sigma = 0.0;
  double t_g = 0.0;
};

struct FilterResult {
  std::vector<std::uint8_t> keep_mask;     ///< 1 = kept (inlier)
  std::vector<double> mean_knn_distance;   ///< meters; NaN for radius filters
  std::vector<double> range;               ///< meters; 3-D for SOR/DSOR/ROR, horizontal for DROR
  std::vector<double> threshold;           ///< meters; T_g, T_d or search radius
  std::size_t kept_count = 0;
  std::size_t removed_count = 0;
  std::optional<GlobalStats> stats;        ///< SOR and DSOR only
  std::vector<std::string> warnings;

  [[nodiscard]] std::size_t size() const noexcept { return keep_mask.size(); }
  [[nodiscard]] bool kept(std::size_t i) const noexcept { return keep_mask[i] != 0; }
};

struct FilterOptions {
  unsigned threads = 1;  ///< 0 = all hardware threads
};

/// Mean distance from each point to its min(k, N-1) nearest neighbors.
/// Throws DegenerateCloudError when N < 2.
[[nodiscard]] std::vector<double> mean_knn_distances(const PointCloud& cloud, std::size_t k,
                                                     const FilterOptions& options = {});
[[nodiscard]] std::vector<double> mean_knn_distances(const SpatialIndex& index, std::size_t k,
                                                     const FilterOptions& options = {});

/// Mean and sample standard deviation (N-1 divisor, 0 for a single value)
/// using compensated summation. Throws InvalidArgumentError on empty or
/// non-finite input.
[[nodiscard]] GlobalStats global_threshold(std::span<const double> mean_distances, double s);

[[nodiscard]] FilterResult sor_filter(const PointCloud& cloud, const SorParams& params,
                                      const FilterOptions& options = {});
[[nodiscard]] FilterResult ror_filter(const PointCloud& cloud, const RorParams& params,
                                      const FilterOptions& options = {});
[[nodiscard]] FilterResult dror_filter(const PointCloud& cloud, const DrorParams& params,
                                       const FilterOptions& options = {});
[[nodiscard]] FilterResult dsor_filter(const PointCloud& cloud, const DsorParams& params,
                                       const FilterOptions& options = {});

[[nodiscard]] FilterResult apply_filter(const PointCloud& cloud, const FilterParams& params,
                                        const FilterOptions& options = {});

/// Decision stage of SOR/DSOR given precomputed mean kNN distances. The full
/// filters call these after the neighbor search; tuning reuses the distances
/// across many (s, r) settings.
[[nodiscard]] FilterResult sor_decide(const PointCloud& cloud,
                                      std::span<const double> mean_distances, double s);
[[nodiscard]] FilterResult dsor_decide(const PointCloud& cloud,
                                       std::span<const double> mean_distances, double s, double r);

/// Squared distance from every point to its m-th nearest other point, for
/// m = 1..max_m (row-major, max_m entries per point; +inf when fewer than m
/// other points exist). Count-in-radius filters reduce to comparisons against
/// these: radius_count(i, R) >= m  iff  d_m(i)^2 <= R^2.
struct OrderStatistics {
  std::size_t max_m = 0;
  std::vector<double> squared;

  [[nodiscard]] double at(std::size_t point, std::size_t m) const {
    return squared[point * max_m + (m - 1)];
  }
};

[[nodiscard]] OrderStatistics neighbor_order_statistics(const SpatialIndex& index,
                                                        std::size_t max_m,
                                                        const FilterOptions& options = {});
[[nodiscard]] FilterResult ror_decide(const PointCloud& cloud, const OrderStatistics& order,
                                      const RorParams& params);
[[nodiscard]] FilterResult dror_decide(const PointCloud& cloud, const OrderStatistics& order,
                                       const DrorParams& params);

enum class Subset { kKept, kRemoved };

/// Points of `cloud` on one side of the mask, in original order.
[[nodiscard]] PointCloud extract(const PointCloud& cloud, const FilterResult& result,
                                 Subset which);

}  // namespace dsor

#endif  // DSOR_FILTERS_HPP_
