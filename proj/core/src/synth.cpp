// Copyright 2026 The DSOR Toolkit Authors
// SPDX-License-Identifier: Apache-2.0

#include "dsor/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "dsor/parallel.hpp"
#include "dsor/philox.hpp"

namespace dsor {

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;

// Slab test for a ray from the origin. Returns the entry distance or a
// negative value on a miss.
double ray_box(const std::array<double, 3>& dir, const Box& box) noexcept {
  double t_near = 0.0;
  double t_far = std::numeric_limits<double>::infinity();
  for (int a = 0; a < 3; ++a) {
    if (dir[a] == 0.0) {
      if (box.min[a] > 0.0 || box.max[a] < 0.0) {
        return -1.0;
      }
      continue;
    }
    double t0 = box.min[a] / dir[a];
    double t1 = box.max[a] / dir[a];
    if (t0 > t1) {
      std::swap(t0, t1);
    }
    t_near = std::max(t_near, t0);
    t_far = std::min(t_far, t1);
    if (t_near > t_far) {
      return -1.0;
    }
  }
  return t_near;
}

// Columns whose rays can hit each box, from the azimuth interval the box's
// footprint subtends at the origin.
std::vector<std::vector<std::uint32_t>> bucket_boxes(const SensorModel& sensor,
                                                     const std::vector<Box>& boxes) {
  const std::size_t columns = sensor.columns();
  const double step = sensor.azimuth_step_deg * kDegToRad;
  std::vector<std::vector<std::uint32_t>> buckets(columns);
  for (std::size_t b = 0; b < boxes.size(); ++b) {
    const Box& box = boxes[b];
    const bool covers_origin = box.min[0] <= 0.0 && box.max[0] >= 0.0 && box.min[1] <= 0.0 &&
                               box.max[1] >= 0.0;
    if (covers_origin) {
      for (auto& bucket : buckets) {
        bucket.push_back(static_cast<std::uint32_t>(b));
      }
      continue;
    }
    const double cx = 0.5 * (box.min[0] + box.max[0]);
    const double cy = 0.5 * (box.min[1] + box.max[1]);
    const double center = std::atan2(cy, cx);
    double lo = 0.0;
    double hi = 0.0;
    for (const double x : {box.min[0], box.max[0]}) {
      for (const double y : {box.min[1], box.max[1]}) {
        double d = std::atan2(y, x) - center;
        d = std::remainder(d, 2.0 * std::numbers::pi);
        lo = std::min(lo, d);
        hi = std::max(hi, d);
      }
    }
    const auto first = static_cast<long long>(std::floor((center + lo) / step)) - 1;
    const auto last = static_cast<long long>(std::ceil((center + hi) / step)) + 1;
    const auto n = static_cast<long long>(columns);
    for (long long c = first; c <= last && c - first < n; ++c) {
      buckets[static_cast<std::size_t>(((c % n) + n) % n)].push_back(static_cast<std::uint32_t>(b));
    }
  }
  return buckets;
}

}  // namespace

void SensorModel::validate() const {
  if (channels < 1) {
    throw InvalidArgumentError("sensor: channels must be >= 1");
  }
  if (!(azimuth_step_deg > 0.0) || azimuth_step_deg > 360.0) {
    throw InvalidArgumentError("sensor: azimuth_step_deg must be in (0, 360]");
  }
  if (!(max_range > 0.0)) {
    throw InvalidArgumentError("sensor: max_range must be positive");
  }
  if (!(vertical_fov_min_deg <= vertical_fov_max_deg) || vertical_fov_min_deg < -90.0 ||
      vertical_fov_max_deg > 90.0) {
    throw InvalidArgumentError("sensor: invalid vertical field of view");
  }
  if (!(range_noise_stddev >= 0.0)) {
    throw InvalidArgumentError("sensor: range_noise_stddev must be >= 0");
  }
}

std::size_t SensorModel::columns() const {
  return static_cast<std::size_t>(std::llround(360.0 / azimuth_step_deg));
}

double SensorModel::channel_elevation_deg(std::size_t c) const {
  if (channels == 1) {
    return 0.5 * (vertical_fov_min_deg + vertical_fov_max_deg);
  }
  return vertical_fov_min_deg + (vertical_fov_max_deg - vertical_fov_min_deg) *
                                    static_cast<double>(c) / static_cast<double>(channels - 1);
}

void SceneSpec::validate() const {
  for (std::size_t b = 0; b < boxes.size(); ++b) {
    const Box& box = boxes[b];
    for (int a = 0; a < 3; ++a) {
      if (!(box.max[a] > box.min[a]) || !std::isfinite(box.min[a]) ||
          !std::isfinite(box.max[a])) {
        throw InvalidArgumentError("scene: box " + std::to_string(b) + " has a non-positive extent");
      }
    }
    const bool contains_origin = box.min[0] <= 0.0 && box.max[0] >= 0.0 && box.min[1] <= 0.0 &&
                                 box.max[1] >= 0.0 && box.min[2] <= 0.0 && box.max[2] >= 0.0;
    if (contains_origin) {
      throw InvalidArgumentError("scene: box " + std::to_string(b) + " contains the sensor");
    }
  }
  if (has_ground && !(ground_z < 0.0)) {
    throw InvalidArgumentError("scene: ground plane must lie below the sensor");
  }
  if (!(ground_extent > 0.0)) {
    throw InvalidArgumentError("scene: ground_extent must be positive");
  }
}

void SnowSpec::validate() const {
  if (!(lognormal_sigma > 0.0) || !std::isfinite(lognormal_mu)) {
    throw InvalidArgumentError("snow: lognormal_sigma must be positive and mu finite");
  }
  if (!(max_snow_range > 0.0)) {
    throw InvalidArgumentError("snow: max_snow_range must be positive");
  }
  // Rejection sampling below needs a non-vanishing acceptance rate.
  if (snow_range_cdf(SnowSpec{.lognormal_mu = lognormal_mu,
                              .lognormal_sigma = lognormal_sigma,
                              .max_snow_range = std::numeric_limits<double>::infinity()},
                     max_snow_range) < 1e-6) {
    throw InvalidArgumentError("snow: max_snow_range truncates almost all of the distribution");
  }
}

double snow_range_cdf(const SnowSpec& snow, double range) {
  if (range <= 0.0) {
    return 0.0;
  }
  auto untruncated = [&](double x) {
    return 0.5 * std::erfc(-(std::log(x) - snow.lognormal_mu) /
                           (snow.lognormal_sigma * std::numbers::sqrt2));
  };
  if (!std::isfinite(snow.max_snow_range)) {
    return untruncated(range);
  }
  if (range >= snow.max_snow_range) {
    return 1.0;
  }
  return untruncated(range) / untruncated(snow.max_snow_range);
}

SceneSpec suburban_scene(std::uint64_t layout_seed, const SceneClasses& classes) {
  const CounterRng rng(layout_seed, RngStream::kLayout);
  std::uint64_t draw = 0;
  auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * rng.uniform(draw++); };

  SceneSpec scene;
  scene.ground_label = classes.road;
  const double ground = scene.ground_z;
  constexpr double kHalfLength = 110.0;

  auto add = [&](double x0, double x1, double y0, double y1, double z0, double z1,
                 std::uint32_t label) {
    scene.boxes.push_back(Box{{x0, y0, z0}, {x1, y1, z1}, label});
  };

  for (const double side : {-1.0, 1.0}) {
    // Plowed snowbanks along both road edges, broken by driveways.
    for (double x = -kHalfLength; x < kHalfLength;) {
      const double len = uniform(6.0, 14.0);
      const double height = uniform(0.4, 1.1);
      const double inner = 4.6 + uniform(0.0, 0.4);
      add(x, x + len, side > 0 ? inner : -inner - 1.2, side > 0 ? inner + 1.2 : -inner, ground,
          ground + height, classes.accumulated_snow);
      x += len + uniform(2.5, 5.0);
    }
    // Parked cars in the curb lane.
    for (double x = -kHalfLength + uniform(0.0, 10.0); x < kHalfLength;) {
      if (std::abs(x) > 7.0 || std::abs(x + 4.5) > 7.0) {
        const double y_in = 2.2 + uniform(0.0, 0.3);
        add(x, x + 4.5, side > 0 ? y_in : -y_in - 1.8, side > 0 ? y_in + 1.8 : -y_in, ground,
            ground + uniform(1.4, 1.7), classes.car);
      }
      x += 4.5 + uniform(4.0, 25.0);
    }
    // Houses set back from the road.
    for (double x = -kHalfLength; x < kHalfLength;) {
      const double width = uniform(9.0, 15.0);
      const double depth = uniform(8.0, 12.0);
      const double setback = uniform(13.0, 20.0);
      add(x, x + width, side > 0 ? setback : -setback - depth, side > 0 ? setback + depth : -setback,
          ground, ground + uniform(5.0, 8.5), classes.building);
      x += width + uniform(6.0, 14.0);
    }
    // Trees between the snowbank and the houses: trunk plus canopy.
    for (double x = -kHalfLength + uniform(0.0, 8.0); x < kHalfLength;) {
      const double y = side * uniform(7.5, 11.0);
      const double trunk_h = uniform(2.0, 3.5);
      const double canopy = uniform(2.0, 4.0);
      add(x - 0.2, x + 0.2, y - 0.2, y + 0.2, ground, ground + trunk_h, classes.trunk);
      add(x - canopy / 2, x + canopy / 2, y - canopy / 2, y + canopy / 2, ground + trunk_h,
          ground + trunk_h + uniform(2.0, 4.0), classes.vegetation);
      x += uniform(8.0, 20.0);
    }
    // Utility poles.
    for (double x = -kHalfLength + uniform(0.0, 30.0); x < kHalfLength; x += 30.0) {
      const double y = side * 6.5;
      add(x - 0.13, x + 0.13, y - 0.13, y + 0.13, ground, ground + 9.0, classes.pole);
    }
  }
  return scene;
}

LabeledCloud generate_scene(const SensorModel& sensor, const SceneSpec& scene) {
  sensor.validate();
  scene.validate();

  const std::size_t columns = sensor.columns();
  const auto buckets = bucket_boxes(sensor, scene.boxes);
  const CounterRng noise(scene.rng_seed, RngStream::kSceneNoise);

  std::vector<double> cos_el(sensor.channels);
  std::vector<double> sin_el(sensor.channels);
  for (std::size_t c = 0; c < sensor.channels; ++c) {
    const double el = sensor.channel_elevation_deg(c) * kDegToRad;
    cos_el[c] = std::cos(el);
    sin_el[c] = std::sin(el);
  }

  LabeledCloud out;
  out.reserve(sensor.ray_count());
  for (std::size_t c = 0; c < sensor.channels; ++c) {
    for (std::size_t col = 0; col < columns; ++col) {
      const double az = static_cast<double>(col) * sensor.azimuth_step_deg * kDegToRad;
      const std::array<double, 3> dir{cos_el[c] * std::cos(az), cos_el[c] * std::sin(az),
                                      sin_el[c]};
      double best = std::numeric_limits<double>::infinity();
      std::uint32_t label = 0;

      if (scene.has_ground && dir[2] < 0.0) {
        const double t = scene.ground_z / dir[2];
        if (std::abs(t * dir[0]) <= scene.ground_extent &&
            std::abs(t * dir[1]) <= scene.ground_extent) {
          best = t;
          label = scene.ground_label;
        }
      }
      for (const std::uint32_t b : buckets[col]) {
        const double t = ray_box(dir, scene.boxes[b]);
        if (t > 0.0 && t < best) {
          best = t;
          label = scene.boxes[b].label;
        }
      }
      if (!(best <= sensor.max_range)) {
        continue;
      }
      const std::uint64_t ray = static_cast<std::uint64_t>(c) * columns + col;
      double t = best;
      if (sensor.range_noise_stddev > 0.0) {
        t += sensor.range_noise_stddev * noise.normal(ray);
        t = std::max(t, 1e-3);
      }
      out.append(Point{static_cast<float>(t * dir[0]), static_cast<float>(t * dir[1]),
                       static_cast<float>(t * dir[2]), 0.0F},
                 label);
    }
  }
  return out;
}

std::vector<double> sample_snow_ranges(const SnowSpec& snow) {
  snow.validate();
  const CounterRng rng(snow.rng_seed, RngStream::kSnowRange);
  std::vector<double> ranges(snow.count);
  for (std::size_t j = 0; j < snow.count; ++j) {
    for (std::uint32_t attempt = 0;; ++attempt) {
      const double r = std::exp(snow.lognormal_mu + snow.lognormal_sigma * rng.normal(j, attempt));
      if (r > 0.0 && r <= snow.max_snow_range) {
        ranges[j] = r;
        break;
      }
    }
  }
  return ranges;
}

LabeledCloud inject_snow(const LabeledCloud& base, const SensorModel& sensor,
                         const SnowSpec& snow) {
  sensor.validate();
  const std::vector<double> ranges = sample_snow_ranges(snow);
  const CounterRng dir_rng(snow.rng_seed, RngStream::kSnowDirection);
  const double el_lo = sensor.vertical_fov_min_deg * kDegToRad;
  const double el_span = (sensor.vertical_fov_max_deg - sensor.vertical_fov_min_deg) * kDegToRad;

  LabeledCloud out = base;
  out.reserve(base.size() + snow.count);
  for (std::size_t j = 0; j < snow.count; ++j) {
    const auto u = dir_rng.uniform2(j);
    const double az = 2.0 * std::numbers::pi * u[0];
    const double el = el_lo + el_span * u[1];
    const double r = ranges[j];
    out.append(Point{static_cast<float>(r * std::cos(el) * std::cos(az)),
                     static_cast<float>(r * std::cos(el) * std::sin(az)),
                     static_cast<float>(r * std::sin(el)), 0.0F},
               snow.label);
  }
  auto classes = base.snow_classes();
  classes.insert(semantic_class(snow.label));
  out.set_snow_classes(std::move(classes));
  return out;
}

LabeledCloud make_benchmark_cloud(std::size_t index, const SensorModel& sensor,
                                  const SceneSpec& scene, const SnowSpec& snow,
                                  std::uint64_t seed) {
  const std::uint64_t cloud_seed = derive_seed(seed, index);
  SceneSpec s = scene;
  s.rng_seed = cloud_seed;
  SnowSpec w = snow;
  w.rng_seed = cloud_seed;
  return inject_snow(generate_scene(sensor, s), sensor, w);
}

std::vector<LabeledCloud> make_benchmark(std::size_t n_clouds, const SensorModel& sensor,
                                         const SceneSpec& scene, const SnowSpec& snow,
                                         std::uint64_t seed, unsigned threads) {
  if (n_clouds < 1) {
    throw InvalidArgumentError("benchmark corpus needs at least one cloud");
  }
  std::vector<LabeledCloud> clouds(n_clouds);
  parallel_for(n_clouds, threads, [&](std::size_t i) {
    clouds[i] = make_benchmark_cloud(i, sensor, scene, snow, seed);
  });
  return clouds;
}

}  // namespace dsor
