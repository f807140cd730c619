// Copyright 2026 The DSOR Toolkit Authors
// SPDX-License-Identifier: Apache-2.0
//
// Exact 3-D nearest-neighbor queries over a point cloud.
//
// SpatialIndex is a balanced k-d tree (median split on the axis of widest
// spread). brute_force_knn / brute_force_radius_count are exhaustive scans with
// the same contract and serve as the reference the tree is tested against.
//
// Neighbor conventions shared by both:
//   * the query point itself is never part of its own result;
//   * distances are Euclidean and un-squared;
//   * results are ordered by (squared distance, point index), so ties resolve
//     to the lower index and results are reproducible.

#ifndef DSOR_SPATIAL_INDEX_HPP_
#define DSOR_SPATIAL_INDEX_HPP_

#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "dsor/point_cloud.hpp"

namespace dsor {

struct Neighbor {
  std::size_t index = 0;
  double distance = 0.0;

  friend bool operator==(const Neighbor&, const Neighbor&) = default;
};

using NeighborList = std::vector<Neighbor>;

/// Same ordering as NeighborList but carrying squared distances, which is what
/// radius tests compare against.
struct SquaredNeighbor {
  std::size_t index = 0;
  double squared_distance = 0.0;

  friend bool operator==(const SquaredNeighbor&, const SquaredNeighbor&) = default;
};

inline constexpr std::size_t kDefaultLeafSize = 16;

class SpatialIndex {
 public:
  /// Builds the tree over a snapshot of `cloud`. The cloud is not referenced
  /// after construction.
  explicit SpatialIndex(const PointCloud& cloud, std::size_t leaf_size = kDefaultLeafSize);

  [[nodiscard]] std::size_t size() const noexcept { return order_.size(); }

  /// The k nearest points to point `query_index`, excluding itself. Returns
  /// fewer than k entries when the cloud has fewer than k other points.
  /// Throws InvalidArgumentError for k == 0 or an out-of-range query.
  [[nodiscard]] NeighborList knn(std::size_t query_index, std::size_t k) const;

  /// knn() with squared distances; writes into `out` to allow buffer reuse.
  void knn_squared(std::size_t query_index, std::size_t k,
                   std::vector<SquaredNeighbor>& out) const;

  /// Number of other points within `radius` (inclusive) of point
  /// `query_index`. Throws InvalidArgumentError for radius <= 0.
  [[nodiscard]] std::size_t radius_count(std::size_t query_index, double radius) const;

  /// Position of point i as stored by the index (double precision).
  [[nodiscard]] std::array<double, 3> position(std::size_t i) const;

  /// Original point indices in leaf order. Visiting queries in this order
  /// keeps consecutive searches in the same region of the tree.
  [[nodiscard]] const std::vector<std::uint32_t>& traversal_order() const noexcept {
    return order_;
  }

 private:
  struct Node {
    std::array<double, 3> lo;
    std::array<double, 3> hi;
    std::uint32_t begin;  // range into order_/coords_
    std::uint32_t end;
    std::int32_t left;    // -1 for leaves
    std::int32_t right;
  };

  std::int32_t build(std::uint32_t begin, std::uint32_t end, std::size_t leaf_size);
  void check_query(std::size_t query_index) const;

  // Points in tree order; coords_[3*j..3*j+2] belongs to original index order_[j].
  std::vector<double> coords_;
  std::vector<std::uint32_t> order_;
  // Original index -> tree slot.
  std::vector<std::uint32_t> slot_;
  // Tree slot -> leaf node holding it.
  std::vector<std::uint32_t> leaf_of_;
  std::vector<Node> nodes_;
};

/// Exhaustive-scan reference for SpatialIndex::knn.
[[nodiscard]] NeighborList brute_force_knn(const PointCloud& cloud, std::size_t query_index,
                                           std::size_t k);

/// Exhaustive-scan reference for SpatialIndex::radius_count.
[[nodiscard]] std::size_t brute_force_radius_count(const PointCloud& cloud,
                                                   std::size_t query_index, double radius);

}  // namespace dsor

#endif  // DSOR_SPATIAL_INDEX_HPP_
