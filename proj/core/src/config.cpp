// Copyright 2026 The DSOR Toolkit Authors
// SPDX-License-Identifier: Apache-2.0

#include "dsor/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <cctype>
#include <charconv>
#include <fstream>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>

namespace dsor {

namespace pt = boost::property_tree;

namespace {

const std::map<std::string, std::set<std::string>>& known_keys() {
  static const std::map<std::string, std::set<std::string>> keys = {
      {"sor", {"k", "s"}},
      {"ror", {"radius", "min_neighbors"}},
      {"dror", {"azimuth_resolution_rad", "beta", "sr_min", "min_neighbors"}},
      {"dsor", {"k", "s", "r"}},
      {"sensor",
       {"channels", "vertical_fov_min_deg", "vertical_fov_max_deg", "azimuth_step_deg",
        "max_range", "range_noise_stddev"}},
      {"scene", {"layout", "layout_seed", "ground_z"}},
      {"snow", {"count", "lognormal_mu", "lognormal_sigma", "max_snow_range", "label"}},
      {"eval", {"snow_classes", "precision_floor", "bin_width", "histogram_max_range"}},
  };
  return keys;
}

template <typename T>
void read(const pt::ptree& tree, const std::string& key, T& out) {
  const auto node = tree.get_child_optional(pt::ptree::path_type(key, '.'));
  if (!node) {
    return;
  }
  const std::string text = node->get_value<std::string>();
  std::istringstream in(text);
  T value{};
  if (!(in >> value) || !(in >> std::ws).eof()) {
    throw InvalidArgumentError("config: cannot parse '" + text + "' for " + key);
  }
  out = value;
}

SceneLayout parse_layout(const std::string& name) {
  for (auto l : {SceneLayout::kSuburban, SceneLayout::kGroundOnly, SceneLayout::kEmpty}) {
    if (layout_name(l) == name) {
      return l;
    }
  }
  throw InvalidArgumentError("config: unknown scene layout '" + name + "'");
}

}  // namespace

std::string_view layout_name(SceneLayout layout) noexcept {
  switch (layout) {
    case SceneLayout::kSuburban:
      return "suburban";
    case SceneLayout::kGroundOnly:
      return "ground_only";
    case SceneLayout::kEmpty:
      return "empty";
  }
  return "unknown";
}

SceneSpec SceneConfig::build() const {
  SceneSpec spec;
  switch (layout) {
    case SceneLayout::kSuburban:
      spec = suburban_scene(layout_seed);
      break;
    case SceneLayout::kGroundOnly:
      break;
    case SceneLayout::kEmpty:
      spec.has_ground = false;
      break;
  }
  spec.ground_z = ground_z;
  for (auto& box : spec.boxes) {
    // suburban_scene places boxes on its default ground height.
    const double shift = ground_z - SceneSpec{}.ground_z;
    box.min[2] += shift;
    box.max[2] += shift;
  }
  return spec;
}

SnowClassSet parse_snow_classes(std::string_view text) {
  SnowClassSet out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t comma = std::min(text.find(',', pos), text.size());
    std::string_view item = text.substr(pos, comma - pos);
    while (!item.empty() && std::isspace(static_cast<unsigned char>(item.front()))) {
      item.remove_prefix(1);
    }
    while (!item.empty() && std::isspace(static_cast<unsigned char>(item.back()))) {
      item.remove_suffix(1);
    }
    unsigned value = 0;
    const auto [end, ec] = std::from_chars(item.data(), item.data() + item.size(), value);
    if (item.empty() || ec != std::errc() || end != item.data() + item.size() || value > 0xFFFFU) {
      throw InvalidArgumentError("invalid snow class '" + std::string(item) +
                                 "' (expected comma-separated integers in 0..65535)");
    }
    out.insert(static_cast<SemanticClass>(value));
    pos = comma + 1;
  }
  return out;
}

std::string format_snow_classes(const SnowClassSet& classes) {
  std::string out;
  for (const auto c : classes) {
    if (!out.empty()) {
      out += ',';
    }
    out += std::to_string(c);
  }
  return out;
}

ToolkitConfig parse_config(std::string_view text) {
  pt::ptree tree;
  std::istringstream in{std::string(text)};
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw InvalidArgumentError(std::string("config: ") + e.what());
  }

  const auto& keys = known_keys();
  for (const auto& [section, body] : tree) {
    const auto it = keys.find(section);
    if (it == keys.end()) {
      throw InvalidArgumentError("config: unknown section [" + section + "]");
    }
    for (const auto& [key, value] : body) {
      if (!it->second.contains(key)) {
        throw InvalidArgumentError("config: unknown key '" + key + "' in [" + section + "]");
      }
    }
  }

  ToolkitConfig c;
  read(tree, "sor.k", c.sor.k);
  read(tree, "sor.s", c.sor.s);
  read(tree, "ror.radius", c.ror.radius);
  read(tree, "ror.min_neighbors", c.ror.min_neighbors);
  read(tree, "dror.azimuth_resolution_rad", c.dror.azimuth_resolution);
  read(tree, "dror.beta", c.dror.beta);
  read(tree, "dror.sr_min", c.dror.sr_min);
  read(tree, "dror.min_neighbors", c.dror.min_neighbors);
  read(tree, "dsor.k", c.dsor.k);
  read(tree, "dsor.s", c.dsor.s);
  read(tree, "dsor.r", c.dsor.r);

  read(tree, "sensor.channels", c.sensor.channels);
  read(tree, "sensor.vertical_fov_min_deg", c.sensor.vertical_fov_min_deg);
  read(tree, "sensor.vertical_fov_max_deg", c.sensor.vertical_fov_max_deg);
  read(tree, "sensor.azimuth_step_deg", c.sensor.azimuth_step_deg);
  read(tree, "sensor.max_range", c.sensor.max_range);
  read(tree, "sensor.range_noise_stddev", c.sensor.range_noise_stddev);

  if (auto layout = tree.get_optional<std::string>("scene.layout")) {
    c.scene.layout = parse_layout(*layout);
  }
  read(tree, "scene.layout_seed", c.scene.layout_seed);
  read(tree, "scene.ground_z", c.scene.ground_z);

  read(tree, "snow.count", c.snow.count);
  read(tree, "snow.lognormal_mu", c.snow.lognormal_mu);
  read(tree, "snow.lognormal_sigma", c.snow.lognormal_sigma);
  read(tree, "snow.max_snow_range", c.snow.max_snow_range);
  read(tree, "snow.label", c.snow.label);

  if (auto classes = tree.get_optional<std::string>("eval.snow_classes")) {
    c.snow_classes = parse_snow_classes(*classes);
  }
  read(tree, "eval.precision_floor", c.precision_floor);
  read(tree, "eval.bin_width", c.bin_width);
  read(tree, "eval.histogram_max_range", c.histogram_max_range);

  c.sor.validate();
  c.ror.validate();
  c.dror.validate();
  c.dsor.validate();
  c.sensor.validate();
  c.snow.validate();
  return c;
}

ToolkitConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open config " + path.string());
  }
  std::ostringstream text;
  text << in.rdbuf();
  try {
    return parse_config(text.str());
  } catch (const InvalidArgumentError& e) {
    throw InvalidArgumentError(path.string() + ": " + e.what());
  }
}

std::string format_config(const ToolkitConfig& c) {
  std::ostringstream out;
  out << std::setprecision(17);
  out << "[sor]\n"
      << "k = " << c.sor.k << "\n"
      << "s = " << c.sor.s << "\n\n";
  out << "[ror]\n"
      << "radius = " << c.ror.radius << "\n"
      << "min_neighbors = " << c.ror.min_neighbors << "\n\n";
  out << "[dror]\n"
      << "azimuth_resolution_rad = " << c.dror.azimuth_resolution << "\n"
      << "beta = " << c.dror.beta << "\n"
      << "sr_min = " << c.dror.sr_min << "\n"
      << "min_neighbors = " << c.dror.min_neighbors << "\n\n";
  out << "[dsor]\n"
      << "k = " << c.dsor.k << "\n"
      << "s = " << c.dsor.s << "\n"
      << "r = " << c.dsor.r << "\n\n";
  out << "[sensor]\n"
      << "channels = " << c.sensor.channels << "\n"
      << "vertical_fov_min_deg = " << c.sensor.vertical_fov_min_deg << "\n"
      << "vertical_fov_max_deg = " << c.sensor.vertical_fov_max_deg << "\n"
      << "azimuth_step_deg = " << c.sensor.azimuth_step_deg << "\n"
      << "max_range = " << c.sensor.max_range << "\n"
      << "range_noise_stddev = " << c.sensor.range_noise_stddev << "\n\n";
  out << "[scene]\n"
      << "layout = " << layout_name(c.scene.layout) << "\n"
      << "layout_seed = " << c.scene.layout_seed << "\n"
      << "ground_z = " << c.scene.ground_z << "\n\n";
  out << "[snow]\n"
      << "count = " << c.snow.count << "\n"
      << "lognormal_mu = " << c.snow.lognormal_mu << "\n"
      << "lognormal_sigma = " << c.snow.lognormal_sigma << "\n"
      << "max_snow_range = " << c.snow.max_snow_range << "\n"
      << "label = " << c.snow.label << "\n\n";
  out << "[eval]\n";
  if (c.snow_classes) {
    out << "snow_classes = " << format_snow_classes(*c.snow_classes) << "\n";
  }
  out << "precision_floor = " << c.precision_floor << "\n"
      << "bin_width = " << c.bin_width << "\n"
      << "histogram_max_range = " << c.histogram_max_range << "\n";
  return out.str();
}

void save_config(const ToolkitConfig& config, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) {
    throw IoError("cannot write config " + path.string());
  }
  out << format_config(config);
  if (!out) {
    throw IoError("write failed on " + path.string());
  }
}

FilterParams params_for(const ToolkitConfig& config, FilterKind kind) {
  switch (kind) {
    case FilterKind::kSor:
      return config.sor;
    case FilterKind::kRor:
      return config.ror;
    case FilterKind::kDror:
      return config.dror;
    case FilterKind::kDsor:
      break;
  }
  return config.dsor;
}

void set_params(ToolkitConfig& config, const FilterParams& params) {
  std::visit(
      [&](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, SorParams>) {
          config.sor = p;
        } else if constexpr (std::is_same_v<T, RorParams>) {
          config.ror = p;
        } else if constexpr (std::is_same_v<T, DrorParams>) {
          config.dror = p;
        } else {
          config.dsor = p;
        }
      },
      params);
}

}  // namespace dsor
