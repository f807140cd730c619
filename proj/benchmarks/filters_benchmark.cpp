// Copyright 2026 The DSOR Toolkit Authors
// SPDX-License-Identifier: Apache-2.0
//
// Microbenchmarks on one synthetic scan. The Arg is the azimuth step in
// hundredths of a degree, so 10 is the full-resolution ~216k-point cloud.

#include <benchmark/benchmark.h>

#include <map>

#include "dsor/filters.hpp"
#include "dsor/spatial_index.hpp"
#include "dsor/synth.hpp"

namespace {

const dsor::PointCloud& scan(std::int64_t step_centideg) {
  static std::map<std::int64_t, dsor::PointCloud> cache;
  auto it = cache.find(step_centideg);
  if (it == cache.end()) {
    dsor::SensorModel sensor;
    sensor.azimuth_step_deg = static_cast<double>(step_centideg) / 100.0;
    const auto lc = dsor::make_benchmark_cloud(0, sensor, dsor::suburban_scene(2020),
                                               dsor::SnowSpec{}, 0);
    it = cache.emplace(step_centideg, lc.cloud()).first;
  }
  return it->second;
}

void set_counters(benchmark::State& state, std::size_t n) {
  state.counters["points"] = static_cast<double>(n);
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}

void BM_IndexBuild(benchmark::State& state) {
  const auto& cloud = scan(state.range(0));
  for (auto _ : state) {
    dsor::SpatialIndex index(cloud);
    benchmark::DoNotOptimize(index);
  }
  set_counters(state, cloud.size());
}

void BM_Knn12(benchmark::State& state) {
  const auto& cloud = scan(state.range(0));
  const dsor::SpatialIndex index(cloud);
  std::vector<dsor::SquaredNeighbor> buf;
  for (auto _ : state) {
    for (std::size_t i = 0; i < cloud.size(); ++i) {
      index.knn_squared(i, 12, buf);
      benchmark::DoNotOptimize(buf.data());
    }
  }
  set_counters(state, cloud.size());
}

void BM_RadiusCount(benchmark::State& state) {
  const auto& cloud = scan(state.range(0));
  const dsor::SpatialIndex index(cloud);
  for (auto _ : state) {
    std::size_t total = 0;
    for (std::size_t i = 0; i < cloud.size(); ++i) {
      total += index.radius_count(i, 0.05);
    }
    benchmark::DoNotOptimize(total);
  }
  set_counters(state, cloud.size());
}

template <class Params>
void BM_Filter(benchmark::State& state) {
  const auto& cloud = scan(state.range(0));
  const dsor::FilterParams params = Params{};
  for (auto _ : state) {
    auto result = dsor::apply_filter(cloud, params);
    benchmark::DoNotOptimize(result.keep_mask.data());
  }
  set_counters(state, cloud.size());
}

}  // namespace

BENCHMARK(BM_IndexBuild)->Arg(40)->Arg(10)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Knn12)->Arg(40)->Arg(10)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_RadiusCount)->Arg(40)->Arg(10)->Unit(benchmark::kMillisecond);
BENCHMARK_TEMPLATE(BM_Filter, dsor::SorParams)->Arg(40)->Arg(10)->Unit(benchmark::kMillisecond);
BENCHMARK_TEMPLATE(BM_Filter, dsor::RorParams)->Arg(40)->Arg(10)->Unit(benchmark::kMillisecond);
BENCHMARK_TEMPLATE(BM_Filter, dsor::DrorParams)->Arg(40)->Arg(10)->Unit(benchmark::kMillisecond);
BENCHMARK_TEMPLATE(BM_Filter, dsor::DsorParams)->Arg(40)->Arg(10)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
