// Copyright 2026 The DSOR Toolkit Authors
// SPDX-License-Identifier: Apache-2.0

#include "dsor/spatial_index.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace dsor {

namespace {

// Lexicographic (squared distance, index) order used for every neighbor list.
bool closer(const SquaredNeighbor& a, const SquaredNeighbor& b) noexcept {
  return a.squared_distance < b.squared_distance ||
         (a.squared_distance == b.squared_distance && a.index < b.index);
}

double squared_distance(const double* a, const double* b) noexcept {
  const double dx = a[0] - b[0];
  const double dy = a[1] - b[1];
  const double dz = a[2] - b[2];
  return dx * dx + dy * dy + dz * dz;
}

// Squared distance from q to the axis-aligned box [lo, hi].
double box_squared_distance(const double* q, const std::array<double, 3>& lo,
                            const std::array<double, 3>& hi) noexcept {
  double d2 = 0.0;
  for (int a = 0; a < 3; ++a) {
    const double d = std::max({lo[a] - q[a], 0.0, q[a] - hi[a]});
    d2 += d * d;
  }
  return d2;
}

// The best `k` candidates seen so far, kept sorted by `closer`.
class KnnBuffer {
 public:
  KnnBuffer(std::size_t k, std::vector<SquaredNeighbor>& storage) : k_(k), buf_(storage) {
    buf_.resize(k);
    data_ = buf_.data();
  }

  [[nodiscard]] double worst() const noexcept { return worst_; }

  void offer(const SquaredNeighbor& n) {
    if (size_ == k_ && !closer(n, data_[size_ - 1])) {
      return;
    }
    std::size_t pos = size_ == k_ ? size_ - 1 : size_++;
    while (pos > 0 && closer(n, data_[pos - 1])) {
      data_[pos] = data_[pos - 1];
      --pos;
    }
    data_[pos] = n;
    if (size_ == k_) {
      worst_ = data_[size_ - 1].squared_distance;
    }
  }

  // Trims the storage to the number of neighbors found.
  void finish() { buf_.resize(size_); }

 private:
  std::size_t k_;
  std::vector<SquaredNeighbor>& buf_;
  SquaredNeighbor* data_ = nullptr;
  std::size_t size_ = 0;
  double worst_ = std::numeric_limits<double>::infinity();
};

}  // namespace

SpatialIndex::SpatialIndex(const PointCloud& cloud, std::size_t leaf_size) {
  const std::size_t n = cloud.size();
  if (n > std::numeric_limits<std::uint32_t>::max()) {
    throw InvalidArgumentError("cloud too large for SpatialIndex");
  }
  leaf_size = std::max<std::size_t>(leaf_size, 1);

  order_.resize(n);
  std::iota(order_.begin(), order_.end(), 0U);
  if (n == 0) {
    return;
  }

  // Build over a temporary original-order coordinate array, then lay the
  // points out contiguously in tree order.
  coords_.resize(3 * n);
  for (std::size_t i = 0; i < n; ++i) {
    coords_[3 * i] = cloud[i].x;
    coords_[3 * i + 1] = cloud[i].y;
    coords_[3 * i + 2] = cloud[i].z;
  }
  nodes_.reserve(2 * (n / leaf_size + 1));
  build(0, static_cast<std::uint32_t>(n), leaf_size);

  std::vector<double> ordered(3 * n);
  slot_.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    const std::size_t src = order_[j];
    ordered[3 * j] = coords_[3 * src];
    ordered[3 * j + 1] = coords_[3 * src + 1];
    ordered[3 * j + 2] = coords_[3 * src + 2];
    slot_[src] = static_cast<std::uint32_t>(j);
  }
  coords_ = std::move(ordered);

  leaf_of_.resize(n);
  for (std::size_t id = 0; id < nodes_.size(); ++id) {
    if (nodes_[id].left < 0) {
      for (std::uint32_t j = nodes_[id].begin; j < nodes_[id].end; ++j) {
        leaf_of_[j] = static_cast<std::uint32_t>(id);
      }
    }
  }
}

std::int32_t SpatialIndex::build(std::uint32_t begin, std::uint32_t end, std::size_t leaf_size) {
  // During construction coords_ is still indexed by original point index.
  Node node{};
  node.lo = {std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
             std::numeric_limits<double>::infinity()};
  node.hi = {-std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity(),
             -std::numeric_limits<double>::infinity()};
  for (std::uint32_t j = begin; j < end; ++j) {
    const double* p = &coords_[3 * static_cast<std::size_t>(order_[j])];
    for (int a = 0; a < 3; ++a) {
      node.lo[a] = std::min(node.lo[a], p[a]);
      node.hi[a] = std::max(node.hi[a], p[a]);
    }
  }
  node.begin = begin;
  node.end = end;
  node.left = -1;
  node.right = -1;

  const auto id = static_cast<std::int32_t>(nodes_.size());
  nodes_.push_back(node);

  int axis = 0;
  double spread = node.hi[0] - node.lo[0];
  for (int a = 1; a < 3; ++a) {
    if (node.hi[a] - node.lo[a] > spread) {
      spread = node.hi[a] - node.lo[a];
      axis = a;
    }
  }
  if (end - begin <= leaf_size || spread <= 0.0) {
    return id;
  }

  const std::uint32_t mid = begin + (end - begin) / 2;
  std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                   [&](std::uint32_t a, std::uint32_t b) {
                     const double ca = coords_[3 * static_cast<std::size_t>(a) + axis];
                     const double cb = coords_[3 * static_cast<std::size_t>(b) + axis];
                     return ca < cb || (ca == cb && a < b);
                   });

  const std::int32_t left = build(begin, mid, leaf_size);
  const std::int32_t right = build(mid, end, leaf_size);
  nodes_[static_cast<std::size_t>(id)].left = left;
  nodes_[static_cast<std::size_t>(id)].right = right;
  return id;
}

void SpatialIndex::check_query(std::size_t query_index) const {
  if (query_index >= size()) {
    throw InvalidArgumentError("query index " + std::to_string(query_index) +
                               " out of range for cloud of " + std::to_string(size()) + " points");
  }
}

std::array<double, 3> SpatialIndex::position(std::size_t i) const {
  check_query(i);
  const double* p = &coords_[3 * static_cast<std::size_t>(slot_[i])];
  return {p[0], p[1], p[2]};
}

void SpatialIndex::knn_squared(std::size_t query_index, std::size_t k,
                               std::vector<SquaredNeighbor>& out) const {
  if (k == 0) {
    throw InvalidArgumentError("knn requires k >= 1");
  }
  check_query(query_index);
  const std::size_t want = std::min(k, size() - 1);
  KnnBuffer best(want, out);
  if (want == 0) {
    return;
  }
  const std::uint32_t query_slot = slot_[query_index];
  const double* q = &coords_[3 * static_cast<std::size_t>(query_slot)];

  auto scan_leaf = [&](const Node& leaf) {
    for (std::uint32_t j = leaf.begin; j < leaf.end; ++j) {
      const double d2 = squared_distance(q, &coords_[3 * static_cast<std::size_t>(j)]);
      if (d2 <= best.worst() && j != query_slot) {
        best.offer({order_[j], d2});
      }
    }
  };

  // The query's own leaf usually holds most of the answer; scanning it first
  // tightens the pruning bound before the descent.
  const std::uint32_t home = leaf_of_[query_slot];
  scan_leaf(nodes_[home]);

  // Explicit stack of (node, lower bound on squared distance).
  struct Pending {
    std::int32_t node;
    double bound;
  };
  std::array<Pending, 128> stack;
  std::size_t top = 0;
  stack[top++] = {0, 0.0};

  while (top > 0) {
    const Pending cur = stack[--top];
    // Ties at the bound may still hold a lower-index neighbor, so only prune
    // strictly farther nodes.
    if (cur.bound > best.worst()) {
      continue;
    }
    const Node& node = nodes_[static_cast<std::size_t>(cur.node)];
    if (node.left < 0) {
      if (static_cast<std::uint32_t>(cur.node) != home) {
        scan_leaf(node);
      }
      continue;
    }
    const Node& l = nodes_[static_cast<std::size_t>(node.left)];
    const Node& r = nodes_[static_cast<std::size_t>(node.right)];
    const double dl = box_squared_distance(q, l.lo, l.hi);
    const double dr = box_squared_distance(q, r.lo, r.hi);
    // Push the farther child first so the nearer one is explored next.
    if (dl <= dr) {
      stack[top++] = {node.right, dr};
      stack[top++] = {node.left, dl};
    } else {
      stack[top++] = {node.left, dl};
      stack[top++] = {node.right, dr};
    }
  }
  best.finish();
}

NeighborList SpatialIndex::knn(std::size_t query_index, std::size_t k) const {
  std::vector<SquaredNeighbor> sq;
  knn_squared(query_index, k, sq);
  NeighborList out;
  out.reserve(sq.size());
  for (const auto& n : sq) {
    out.push_back({n.index, std::sqrt(n.squared_distance)});
  }
  return out;
}

std::size_t SpatialIndex::radius_count(std::size_t query_index, double radius) const {
  if (!(radius > 0.0)) {
    throw InvalidArgumentError("radius must be positive");
  }
  check_query(query_index);
  const double r2 = radius * radius;
  const double* q = &coords_[3 * static_cast<std::size_t>(slot_[query_index])];

  std::size_t count = 0;
  std::array<std::int32_t, 128> stack;
  std::size_t top = 0;
  stack[top++] = 0;
  while (top > 0) {
    const Node& node = nodes_[static_cast<std::size_t>(stack[--top])];
    if (box_squared_distance(q, node.lo, node.hi) > r2) {
      continue;
    }
    if (node.left < 0) {
      for (std::uint32_t j = node.begin; j < node.end; ++j) {
        if (squared_distance(q, &coords_[3 * static_cast<std::size_t>(j)]) <= r2) {
          ++count;
        }
      }
      continue;
    }
    stack[top++] = node.right;
    stack[top++] = node.left;
  }
  // The query point itself is always within radius.
  return count - 1;
}

NeighborList brute_force_knn(const PointCloud& cloud, std::size_t query_index, std::size_t k) {
  if (k == 0) {
    throw InvalidArgumentError("knn requires k >= 1");
  }
  if (query_index >= cloud.size()) {
    throw InvalidArgumentError("query index " + std::to_string(query_index) +
                               " out of range for cloud of " + std::to_string(cloud.size()) +
                               " points");
  }
  const double q[3] = {cloud[query_index].x, cloud[query_index].y, cloud[query_index].z};
  std::vector<SquaredNeighbor> all;
  all.reserve(cloud.size());
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    if (i == query_index) {
      continue;
    }
    const double p[3] = {cloud[i].x, cloud[i].y, cloud[i].z};
    all.push_back({i, squared_distance(q, p)});
  }
  std::sort(all.begin(), all.end(), closer);
  all.resize(std::min(k, all.size()));
  NeighborList out;
  out.reserve(all.size());
  for (const auto& n : all) {
    out.push_back({n.index, std::sqrt(n.squared_distance)});
  }
  return out;
}

std::size_t brute_force_radius_count(const PointCloud& cloud, std::size_t query_index,
                                     double radius) {
  if (!(radius > 0.0)) {
    throw InvalidArgumentError("radius must be positive");
  }
  if (query_index >= cloud.size()) {
    throw InvalidArgumentError("query index out of range");
  }
  const double q[3] = {cloud[query_index].x, cloud[query_index].y, cloud[query_index].z};
  const double r2 = radius * radius;
  std::size_t count = 0;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const double p[3] = {cloud[i].x, cloud[i].y, cloud[i].z};
    if (i != query_index && squared_distance(q, p) <= r2) {
      ++count;
    }
  }
  return count;
}

}  // namespace dsor
