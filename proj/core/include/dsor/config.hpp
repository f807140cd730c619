// Copyright 2026 The DSOR Toolkit Authors
// SPDX-License-Identifier: Apache-2.0
//
// Plain-text configuration: "key = value" lines grouped in [section]s, one
// section per filter plus [sensor], [scene], [snow] and [eval]. '#' and ';'
// start comments. Unknown sections or keys are rejected so that typos do not
// silently fall back to defaults.

#ifndef DSOR_CONFIG_HPP_
#define DSOR_CONFIG_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "dsor/filters.hpp"
#include "dsor/point_cloud.hpp"
#include "dsor/synth.hpp"

namespace dsor {

enum class SceneLayout { kSuburban, kGroundOnly, kEmpty };

struct SceneConfig {
  SceneLayout layout = SceneLayout::kSuburban;
  std::uint64_t layout_seed = 2020;
  double ground_z = -1.8;

  /// The SceneSpec this configuration describes (rng_seed left at 0).
  [[nodiscard]] SceneSpec build() const;
};

struct ToolkitConfig {
  SorParams sor;
  RorParams ror;
  DrorParams dror;
  DsorParams dsor;

  SensorModel sensor;
  SceneConfig scene;
  SnowSpec snow;

  /// Semantic classes scored as snow. Deliberately has no default: evaluation
  /// refuses to run until the user supplies it.
  std::optional<SnowClassSet> snow_classes;
  double precision_floor = 0.6;
  double bin_width = 5.0;
  double histogram_max_range = 80.0;
};

/// Environment variable naming the default config file.
inline constexpr const char* kConfigEnvVar = "DSOR_CONFIG";

/// Throws InvalidArgumentError with the offending key on parse errors.
[[nodiscard]] ToolkitConfig parse_config(std::string_view text);
[[nodiscard]] ToolkitConfig load_config(const std::filesystem::path& path);

/// Full-precision rendering; parse_config(format_config(c)) reproduces c.
[[nodiscard]] std::string format_config(const ToolkitConfig& config);
void save_config(const ToolkitConfig& config, const std::filesystem::path& path);

[[nodiscard]] FilterParams params_for(const ToolkitConfig& config, FilterKind kind);
void set_params(ToolkitConfig& config, const FilterParams& params);

/// "110,111" -> {110, 111}. Throws on empty lists or values above 65535.
[[nodiscard]] SnowClassSet parse_snow_classes(std::string_view text);
[[nodiscard]] std::string format_snow_classes(const SnowClassSet& classes);

[[nodiscard]] std::string_view layout_name(SceneLayout layout) noexcept;

}  // namespace dsor

#endif  // DSOR_CONFIG_HPP_
