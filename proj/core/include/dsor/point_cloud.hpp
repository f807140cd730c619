// Copyright 2026 The DSOR Toolkit Authors
// SPDX-License-Identifier: Apache-2.0
//
// Core value types shared by every module: points, clouds, point-wise labels
// and the error hierarchy.

#ifndef DSOR_POINT_CLOUD_HPP_
#define DSOR_POINT_CLOUD_HPP_

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace dsor {

/// Base class for all errors raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// File could not be opened, read or written.
class IoError : public Error {
 public:
  using Error::Error;
};

/// File content violates the expected binary layout.
class MalformedFileError : public Error {
 public:
  using Error::Error;
};

/// Two sequences that must be index-aligned have different lengths.
class LengthMismatchError : public Error {
 public:
  using Error::Error;
};

/// A parameter is outside its documented domain.
class InvalidArgumentError : public Error {
 public:
  using Error::Error;
};

/// The cloud has too few points for the requested statistic.
class DegenerateCloudError : public Error {
 public:
  using Error::Error;
};

/// One LiDAR return in the sensor frame. Coordinates are meters; intensity is
/// carried as payload and is not used by any filter.
struct Point {
  float x = 0.0F;
  float y = 0.0F;
  float z = 0.0F;
  float intensity = 0.0F;

  [[nodiscard]] bool finite() const noexcept {
    return std::isfinite(x) && std::isfinite(y) && std::isfinite(z);
  }

  /// Euclidean distance from the sensor origin, sqrt(x^2 + y^2 + z^2).
  [[nodiscard]] double range() const noexcept {
    const double dx = x, dy = y, dz = z;
    return std::sqrt(dx * dx + dy * dy + dz * dz);
  }

  /// Distance from the sensor origin projected on the ground plane.
  [[nodiscard]] double horizontal_range() const noexcept {
    const double dx = x, dy = y;
    return std::sqrt(dx * dx + dy * dy);
  }

  friend bool operator==(const Point&, const Point&) = default;
};

/// Ordered sequence of points. Subset operations preserve relative order.
struct PointCloud {
  std::vector<Point> points;
  std::optional<std::string> frame_id;

  PointCloud() = default;
  explicit PointCloud(std::vector<Point> pts) : points(std::move(pts)) {}

  [[nodiscard]] std::size_t size() const noexcept { return points.size(); }
  [[nodiscard]] bool empty() const noexcept { return points.empty(); }
  const Point& operator[](std::size_t i) const noexcept { return points[i]; }
  Point& operator[](std::size_t i) noexcept { return points[i]; }

  auto begin() const noexcept { return points.begin(); }
  auto end() const noexcept { return points.end(); }

  friend bool operator==(const PointCloud&, const PointCloud&) = default;
};

using SemanticClass = std::uint16_t;

/// Point-wise label words in SemanticKITTI layout: semantic class in the low
/// 16 bits, instance id in the high 16 bits.
using LabelVector = std::vector<std::uint32_t>;

[[nodiscard]] constexpr SemanticClass semantic_class(std::uint32_t label) noexcept {
  return static_cast<SemanticClass>(label & 0xFFFFU);
}

[[nodiscard]] constexpr std::uint16_t instance_id(std::uint32_t label) noexcept {
  return static_cast<std::uint16_t>(label >> 16U);
}

[[nodiscard]] constexpr std::uint32_t make_label(SemanticClass cls,
                                                 std::uint16_t instance = 0) noexcept {
  return (static_cast<std::uint32_t>(instance) << 16U) | cls;
}

using SnowClassSet = std::set<SemanticClass>;

/// A cloud with index-aligned labels and the caller-chosen set of semantic
/// classes that count as snow (the positive class during evaluation).
class LabeledCloud {
 public:
  LabeledCloud() = default;

  /// Throws LengthMismatchError when the lengths differ.
  LabeledCloud(PointCloud cloud, LabelVector labels, SnowClassSet snow_classes);

  [[nodiscard]] const PointCloud& cloud() const noexcept { return cloud_; }
  [[nodiscard]] const LabelVector& labels() const noexcept { return labels_; }
  [[nodiscard]] const SnowClassSet& snow_classes() const noexcept { return snow_classes_; }
  [[nodiscard]] std::size_t size() const noexcept { return cloud_.size(); }

  [[nodiscard]] bool is_snow(std::size_t i) const {
    return snow_classes_.contains(semantic_class(labels_[i]));
  }
  [[nodiscard]] std::size_t snow_count() const;

  void append(const Point& p, std::uint32_t label) {
    cloud_.points.push_back(p);
    labels_.push_back(label);
  }
  void reserve(std::size_t n) {
    cloud_.points.reserve(n);
    labels_.reserve(n);
  }
  void set_snow_classes(SnowClassSet classes) { snow_classes_ = std::move(classes); }

  friend bool operator==(const LabeledCloud&, const LabeledCloud&) = default;

 private:
  PointCloud cloud_;
  LabelVector labels_;
  SnowClassSet snow_classes_;
};

/// Pairs a cloud with its labels. Throws LengthMismatchError naming both
/// lengths when they differ.
[[nodiscard]] LabeledCloud attach_labels(PointCloud cloud, LabelVector labels,
                                         SnowClassSet snow_classes);

}  // namespace dsor

#endif  // DSOR_POINT_CLOUD_HPP_
