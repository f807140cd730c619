// Copyright 2026 The DSOR Toolkit Authors
// SPDX-License-Identifier: Apache-2.0
//
// Synthetic winter scans with exact ground truth.
//
// A spinning multi-channel LiDAR at the origin ray-casts one revolution
// against a ground plane and axis-aligned boxes; the first hit of each ray
// becomes a labeled point. Snow clutter is then appended with log-normally
// distributed range, uniform azimuth, and elevation uniform over the sensor's
// vertical field of view. All randomness comes from CounterRng, so output is
// a pure function of the specs and seeds.

#ifndef DSOR_SYNTH_HPP_
#define DSOR_SYNTH_HPP_

#include <array>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <vector>

#include "dsor/point_cloud.hpp"

namespace dsor {

struct SensorModel {
  std::size_t channels = 64;
  double vertical_fov_min_deg = -25.0;
  double vertical_fov_max_deg = 15.0;
  double azimuth_step_deg = 0.2;
  double max_range = 120.0;           ///< meters
  double range_noise_stddev = 0.01;   ///< meters, Gaussian along the ray

  void validate() const;
  [[nodiscard]] std::size_t columns() const;
  /// Elevation of channel c in degrees; channels are evenly spaced from the
  /// bottom to the top of the field of view.
  [[nodiscard]] double channel_elevation_deg(std::size_t c) const;
  [[nodiscard]] std::size_t ray_count() const { return channels * columns(); }
};

struct Box {
  std::array<double, 3> min{};
  std::array<double, 3> max{};
  std::uint32_t label = 0;
};

struct SceneSpec {
  bool has_ground = true;
  double ground_z = -1.8;  ///< plane height relative to the sensor
  /// Ground exists for |x| and |y| up to this many meters.
  double ground_extent = std::numeric_limits<double>::infinity();
  std::uint32_t ground_label = 40;
  std::vector<Box> boxes;
  std::uint64_t rng_seed = 0;

  void validate() const;
};

struct SnowSpec {
  std::size_t count = 20000;
  double lognormal_mu = 1.6094379124341003;  ///< ln(5 m)
  double lognormal_sigma = 0.55;
  double max_snow_range = 40.0;              ///< meters; truncation point
  std::uint32_t label = 110;                 ///< label word written for snow points
  std::uint64_t rng_seed = 0;

  void validate() const;
};

/// Class ids used by suburban_scene().
struct SceneClasses {
  std::uint32_t road = 40;
  std::uint32_t car = 10;
  std::uint32_t building = 50;
  std::uint32_t vegetation = 70;
  std::uint32_t trunk = 71;
  std::uint32_t pole = 80;
  std::uint32_t accumulated_snow = 111;
};

/// Procedural suburban street: a road along the x axis lined with snowbanks,
/// parked cars, houses, trees and poles. Layout is a pure function of
/// `layout_seed`.
[[nodiscard]] SceneSpec suburban_scene(std::uint64_t layout_seed, const SceneClasses& classes = {});

[[nodiscard]] LabeledCloud generate_scene(const SensorModel& sensor, const SceneSpec& scene);

/// Appends snow.count snow points to `base` (labels preserved, snow appended
/// after the environment points).
[[nodiscard]] LabeledCloud inject_snow(const LabeledCloud& base, const SensorModel& sensor,
                                       const SnowSpec& snow);

/// Ranges of the snow points inject_snow would generate, in order.
[[nodiscard]] std::vector<double> sample_snow_ranges(const SnowSpec& snow);

/// CDF of the truncated log-normal snow range distribution.
[[nodiscard]] double snow_range_cdf(const SnowSpec& snow, double range);

/// The index-th cloud of a benchmark corpus: scene and snow seeded with
/// derive_seed(seed, index).
[[nodiscard]] LabeledCloud make_benchmark_cloud(std::size_t index, const SensorModel& sensor,
                                                const SceneSpec& scene, const SnowSpec& snow,
                                                std::uint64_t seed);

/// n_clouds benchmark clouds; generation is parallel over clouds but the
/// result does not depend on `threads`.
[[nodiscard]] std::vector<LabeledCloud> make_benchmark(std::size_t n_clouds,
                                                       const SensorModel& sensor,
                                                       const SceneSpec& scene,
                                                       const SnowSpec& snow, std::uint64_t seed,
                                                       unsigned threads = 1);

}  // namespace dsor

#endif  // DSOR_SYNTH_HPP_
