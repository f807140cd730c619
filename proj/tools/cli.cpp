// Copyright 2026 The DSOR Toolkit Authors
// SPDX-License-Identifier: Apache-2.0

#include "cli.hpp"

#include <sys/utsname.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "CLI11.hpp"
#include "dsor/cloud_io.hpp"
#include "dsor/config.hpp"
#include "dsor/eval.hpp"
#include "dsor/filters.hpp"
#include "dsor/parallel.hpp"
#include "dsor/report_io.hpp"
#include "dsor/synth.hpp"
#include "json.hpp"

#ifndef DSOR_TOOL_VERSION
#define DSOR_TOOL_VERSION "unknown"
#endif

namespace dsor::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

json host_info() {
  json host;
  host["hardware_concurrency"] = std::thread::hardware_concurrency();
#if defined(__VERSION__)
  host["compiler"] = __VERSION__;
#endif
  utsname u{};
  if (uname(&u) == 0) {
    host["os"] = std::string(u.sysname) + " " + u.release;
    host["machine"] = u.machine;
  }
  return host;
}

// ---------------------------------------------------------------------------
// Shared flag groups

struct CommonFlags {
  std::string config_path;
  std::optional<unsigned> threads;
  std::string output_dir;
};

void add_common(CLI::App& cmd, CommonFlags& f, bool needs_output) {
  cmd.add_option("--config", f.config_path,
                 std::string("INI config file (default: $") + kConfigEnvVar + ", else built-in)");
  cmd.add_option("--threads", f.threads, "worker threads, 0 = all cores");
  auto* o = cmd.add_option("-o,--output", f.output_dir, "output directory");
  if (needs_output) {
    o->required();
  }
}

struct ParamFlags {
  std::optional<std::size_t> k;
  std::optional<double> s;
  std::optional<double> r;
  std::optional<double> radius;
  std::optional<std::size_t> min_neighbors;
  std::optional<double> beta;
  std::optional<double> sr_min;
  std::optional<double> azimuth_resolution;
};

void add_params(CLI::App& cmd, ParamFlags& p) {
  cmd.add_option("--k", p.k, "neighbors (sor, dsor)");
  cmd.add_option("--s", p.s, "stddev multiplier (sor, dsor)");
  cmd.add_option("--r", p.r, "range multiplier in 1/m (dsor)");
  cmd.add_option("--radius", p.radius, "search radius in m (ror)");
  cmd.add_option("--min-neighbors", p.min_neighbors, "minimum neighbors (ror, dror)");
  cmd.add_option("--beta", p.beta, "radius multiplier (dror)");
  cmd.add_option("--sr-min", p.sr_min, "minimum search radius in m (dror)");
  cmd.add_option("--azimuth-resolution-rad", p.azimuth_resolution,
                 "sensor azimuth resolution in radians (dror)");
}

struct Loaded {
  ToolkitConfig config;
  std::optional<fs::path> path;
};

Loaded load(const CommonFlags& f) {
  if (!f.config_path.empty()) {
    return {load_config(f.config_path), fs::path(f.config_path)};
  }
  if (const char* env = std::getenv(kConfigEnvVar); env != nullptr && *env != '\0') {
    return {load_config(env), fs::path(env)};
  }
  return {ToolkitConfig{}, std::nullopt};
}

FilterKind parse_kind(const std::string& name) {
  if (auto kind = parse_filter_kind(name)) {
    return *kind;
  }
  throw UsageError("unknown filter '" + name + "' (expected one of sor, ror, dror, dsor)");
}

// Config params for `kind`, overridden by any flags given. A flag that does
// not belong to the filter is a usage error.
FilterParams resolve_params(FilterKind kind, const ToolkitConfig& config, const ParamFlags& f) {
  FilterParams params = params_for(config, kind);
  std::set<std::string> used;
  auto set = [&](auto& dst, const auto& src, const char* name) {
    if (src) {
      dst = *src;
      used.insert(name);
    }
  };
  std::visit(
      [&](auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, SorParams>) {
          set(p.k, f.k, "k");
          set(p.s, f.s, "s");
        } else if constexpr (std::is_same_v<T, RorParams>) {
          set(p.radius, f.radius, "radius");
          set(p.min_neighbors, f.min_neighbors, "min-neighbors");
        } else if constexpr (std::is_same_v<T, DrorParams>) {
          set(p.azimuth_resolution, f.azimuth_resolution, "azimuth-resolution-rad");
          set(p.beta, f.beta, "beta");
          set(p.sr_min, f.sr_min, "sr-min");
          set(p.min_neighbors, f.min_neighbors, "min-neighbors");
        } else {
          set(p.k, f.k, "k");
          set(p.s, f.s, "s");
          set(p.r, f.r, "r");
        }
      },
      params);

  const std::pair<bool, const char*> given[] = {
      {f.k.has_value(), "k"},
      {f.s.has_value(), "s"},
      {f.r.has_value(), "r"},
      {f.radius.has_value(), "radius"},
      {f.min_neighbors.has_value(), "min-neighbors"},
      {f.beta.has_value(), "beta"},
      {f.sr_min.has_value(), "sr-min"},
      {f.azimuth_resolution.has_value(), "azimuth-resolution-rad"},
  };
  for (const auto& [present, name] : given) {
    if (present && !used.contains(name)) {
      throw UsageError(std::string("--") + name + " does not apply to " +
                       std::string(filter_name(kind)));
    }
  }
  try {
    std::visit([](const auto& p) { p.validate(); }, params);
  } catch (const InvalidArgumentError& e) {
    throw UsageError(e.what());
  }
  return params;
}

SnowClassSet resolve_snow_classes(const std::optional<std::string>& flag,
                                  const ToolkitConfig& config) {
  if (flag) {
    try {
      return parse_snow_classes(*flag);
    } catch (const InvalidArgumentError& e) {
      throw UsageError(std::string("--snow-classes: ") + e.what());
    }
  }
  if (config.snow_classes) {
    return *config.snow_classes;
  }
  throw UsageError("--snow-classes is required (no default snow class set)");
}

std::vector<double> parse_fractions(const std::string& text) {
  std::vector<double> fractions;
  try {
    if (text.find(':') != std::string::npos) {
      std::vector<std::string> parts;
      std::stringstream ss(text);
      for (std::string item; std::getline(ss, item, ':');) {
        parts.push_back(item);
      }
      if (parts.size() != 3) {
        throw UsageError("--fractions expects first:last:count or a comma list");
      }
      std::size_t pos = 0;
      const long long count = std::stoll(parts[2], &pos);
      if (pos != parts[2].size() || count < 0) {
        throw UsageError("--fractions: invalid count '" + parts[2] + "'");
      }
      if (count < 3) {
        throw UsageError("--fractions needs at least 3 fractions");
      }
      fractions = linspace_fractions(std::stod(parts[0]), std::stod(parts[1]),
                                     static_cast<std::size_t>(count));
    } else {
      std::stringstream ss(text);
      for (std::string item; std::getline(ss, item, ',');) {
        fractions.push_back(std::stod(item));
      }
    }
  } catch (const std::invalid_argument&) {
    throw UsageError("--fractions: cannot parse '" + text + "'");
  } catch (const std::out_of_range&) {
    throw UsageError("--fractions: value out of range in '" + text + "'");
  } catch (const InvalidArgumentError& e) {
    throw UsageError(std::string("--fractions: ") + e.what());
  }
  if (fractions.size() < 3) {
    throw UsageError("--fractions needs at least 3 fractions");
  }
  for (const double f : fractions) {
    if (!(f > 0.0 && f <= 1.0)) {
      throw UsageError("--fractions values must lie in (0, 1]");
    }
  }
  return fractions;
}

std::vector<FilterKind> parse_filter_list(const std::string& text) {
  std::vector<FilterKind> kinds;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ',');) {
    kinds.push_back(parse_kind(item));
  }
  if (kinds.empty()) {
    throw UsageError("--filters is empty");
  }
  return kinds;
}

// SOR and DSOR are undefined below two points; the tool keeps such clouds
// whole and warns instead of failing a whole batch.
FilterResult run_filter(const PointCloud& cloud, const FilterParams& params, unsigned threads) {
  const FilterKind kind = kind_of(params);
  const bool statistical = kind == FilterKind::kSor || kind == FilterKind::kDsor;
  if (statistical && cloud.size() < 2) {
    FilterResult r;
    const double nan = std::numeric_limits<double>::quiet_NaN();
    r.keep_mask.assign(cloud.size(), 1);
    r.mean_knn_distance.assign(cloud.size(), nan);
    r.threshold.assign(cloud.size(), nan);
    for (const auto& p : cloud.points) {
      r.range.push_back(p.range());
    }
    r.kept_count = cloud.size();
    r.warnings.push_back("cloud has " + std::to_string(cloud.size()) + " point(s); " +
                         std::string(filter_name(kind)) +
                         " needs at least 2, all points kept");
    return r;
  }
  return apply_filter(cloud, params, FilterOptions{threads});
}

FilterResult result_from_mask(const PointCloud& cloud, std::vector<std::uint8_t> mask) {
  if (mask.size() != cloud.size()) {
    throw LengthMismatchError("mask has " + std::to_string(mask.size()) + " entries, cloud has " +
                              std::to_string(cloud.size()) + " points");
  }
  FilterResult r;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  r.keep_mask = std::move(mask);
  r.mean_knn_distance.assign(cloud.size(), nan);
  r.threshold.assign(cloud.size(), nan);
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    r.range.push_back(cloud[i].range());
    if (r.keep_mask[i] != 0) {
      ++r.kept_count;
    } else {
      ++r.removed_count;
    }
  }
  return r;
}

std::vector<ManifestEntry> load_manifest(const std::string& path) {
  auto entries = read_manifest(path);
  if (entries.empty()) {
    throw InvalidArgumentError("manifest " + path + " lists no scans");
  }
  return entries;
}

// ---------------------------------------------------------------------------
// Output bookkeeping

class Run {
 public:
  Run(const std::vector<std::string>& argv, std::ostream& out, std::ostream& err)
      : argv_(argv), out_(out), err_(err), started_(utc_now()) {}

  std::ostream& err() { return err_; }

  void open(const std::string& dir) {
    dir_ = dir;
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec || !fs::is_directory(dir_)) {
      throw IoError("cannot create output directory " + dir_.string() + ": " + ec.message());
    }
  }

  [[nodiscard]] fs::path path(const std::string& name) const { return dir_ / name; }

  // Records a written file and echoes its path on stdout.
  void wrote(const fs::path& p) {
    outputs_.push_back(p.lexically_relative(dir_).generic_string());
    out_ << p.string() << '\n';
  }

  void text(const std::string& name, const std::string& body) {
    const fs::path p = path(name);
    write_text(body, p);
    wrote(p);
  }

  void warn(const std::string& what) {
    warnings_.push_back(what);
    err_ << "warning: " << what << '\n';
  }

  void finish(const std::string& subcommand, const Loaded& cfg, unsigned threads, json extra) {
    json j;
    j["tool"] = "dsor";
    j["version"] = DSOR_TOOL_VERSION;
    j["subcommand"] = subcommand;
    j["argv"] = argv_;
    j["config_path"] = cfg.path ? json(cfg.path->string()) : json(nullptr);
    j["effective_config"] = format_config(cfg.config);
    j["threads"] = threads;
    j["started_at"] = started_;
    j["finished_at"] = utc_now();
    j["host"] = host_info();
    j["warnings"] = warnings_;
    j["outputs"] = outputs_;
    for (auto& [key, value] : extra.items()) {
      j[key] = value;
    }
    const fs::path p = path("run.json");
    write_text(j.dump(2) + "\n", p);
    out_ << p.string() << '\n';
  }

 private:
  std::vector<std::string> argv_;
  std::ostream& out_;
  std::ostream& err_;
  std::string started_;
  fs::path dir_;
  std::vector<std::string> outputs_;
  std::vector<std::string> warnings_;
};

std::string stem_name(std::size_t i) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%06zu", i);
  return buf;
}

// ---------------------------------------------------------------------------
// Subcommands

struct SynthFlags {
  CommonFlags common;
  std::size_t clouds = 100;
  std::uint64_t seed = 0;
  std::optional<std::size_t> snow_count;
  std::optional<double> azimuth_step;
};

void cmd_synth(const SynthFlags& f, Run& run) {
  if (f.clouds == 0) {
    throw UsageError("--clouds must be at least 1");
  }
  Loaded cfg = load(f.common);
  if (f.snow_count) {
    cfg.config.snow.count = *f.snow_count;
  }
  if (f.azimuth_step) {
    cfg.config.sensor.azimuth_step_deg = *f.azimuth_step;
  }
  try {
    cfg.config.sensor.validate();
    cfg.config.snow.validate();
  } catch (const InvalidArgumentError& e) {
    throw UsageError(e.what());
  }
  const unsigned threads = resolve_threads(f.common.threads.value_or(0));

  run.open(f.common.output_dir);
  fs::create_directories(run.path("velodyne"));
  fs::create_directories(run.path("labels"));
  const SceneSpec scene = cfg.config.scene.build();

  std::vector<ManifestEntry> entries(f.clouds);
  std::vector<std::size_t> sizes(f.clouds);
  parallel_for(f.clouds, threads, [&](std::size_t i) {
    const LabeledCloud lc =
        make_benchmark_cloud(i, cfg.config.sensor, scene, cfg.config.snow, f.seed);
    entries[i].scan = run.path("velodyne") / (stem_name(i) + ".bin");
    entries[i].labels = run.path("labels") / (stem_name(i) + ".label");
    write_cloud(lc.cloud(), entries[i].scan);
    write_labels(lc.labels(), *entries[i].labels);
    sizes[i] = lc.size();
  });
  for (const auto& e : entries) {
    run.wrote(e.scan);
    run.wrote(*e.labels);
  }
  write_manifest(entries, run.path("manifest.txt"));
  run.wrote(run.path("manifest.txt"));
  run.text("config.ini", format_config(cfg.config));

  double total = 0.0;
  for (const auto n : sizes) {
    total += static_cast<double>(n);
  }
  run.finish("synth", cfg, threads,
             {{"seed", f.seed},
              {"clouds", f.clouds},
              {"mean_points_per_cloud", total / static_cast<double>(f.clouds)}});
}

struct FilterFlags {
  CommonFlags common;
  ParamFlags params;
  std::string filter;
  std::vector<std::string> inputs;
  std::string manifest;
  bool no_removed = false;
  bool drop_non_finite = false;
};

void cmd_filter(const FilterFlags& f, Run& run) {
  const FilterKind kind = parse_kind(f.filter);
  if (f.inputs.empty() == f.manifest.empty()) {
    throw UsageError("give either -i/--input scans or --manifest");
  }
  const Loaded cfg = load(f.common);
  const FilterParams params = resolve_params(kind, cfg.config, f.params);
  const unsigned threads = resolve_threads(f.common.threads.value_or(0));
  const NonFinitePolicy policy = f.drop_non_finite ? NonFinitePolicy::kDrop : NonFinitePolicy::kReject;

  std::vector<fs::path> scans;
  if (!f.manifest.empty()) {
    for (const auto& e : load_manifest(f.manifest)) {
      scans.push_back(e.scan);
    }
  } else {
    scans.assign(f.inputs.begin(), f.inputs.end());
  }
  for (const auto& s : scans) {
    if (!fs::exists(s)) {
      throw IoError("input scan not found: " + s.string());
    }
  }

  run.open(f.common.output_dir);
  std::set<std::string> stems;
  for (const auto& scan : scans) {
    const std::string stem = scan.stem().string();
    if (!stems.insert(stem).second) {
      throw InvalidArgumentError("two inputs share the file stem '" + stem + "'");
    }
    CloudReadStats stats;
    const PointCloud cloud = read_cloud(scan, policy, &stats);
    if (stats.dropped_non_finite > 0) {
      run.warn(stem + ": dropped " + std::to_string(stats.dropped_non_finite) +
               " non-finite points");
    }
    const FilterResult result = run_filter(cloud, params, threads);
    for (const auto& w : result.warnings) {
      run.warn(stem + ": " + w);
    }

    const fs::path kept = run.path(stem + ".kept.bin");
    write_cloud(extract(cloud, result, Subset::kKept), kept);
    run.wrote(kept);
    if (!f.no_removed) {
      const fs::path removed = run.path(stem + ".removed.bin");
      write_cloud(extract(cloud, result, Subset::kRemoved), removed);
      run.wrote(removed);
    }
    const fs::path mask = run.path(stem + ".mask");
    write_mask(result.keep_mask, mask);
    run.wrote(mask);
    run.text(stem + ".diag.csv", diagnostics_csv(result));
    run.err() << stem << ": kept " << result.kept_count << ", removed " << result.removed_count
              << '\n';
  }
  run.finish("filter", cfg, threads,
             {{"filter", filter_name(kind)}, {"params", describe(params)}});
}

struct EvalFlags {
  CommonFlags common;
  ParamFlags params;
  std::string filter;
  std::string manifest;
  std::string masks;
  std::optional<std::string> snow_classes;
  std::optional<double> bin_width;
  std::optional<double> max_range;
  bool drop_non_finite = false;
};

void cmd_eval(const EvalFlags& f, Run& run) {
  if (f.filter.empty() == f.masks.empty()) {
    throw UsageError("give either a filter name or --masks, not both");
  }
  Loaded cfg = load(f.common);
  const SnowClassSet snow = resolve_snow_classes(f.snow_classes, cfg.config);
  cfg.config.snow_classes = snow;
  std::optional<FilterParams> params;
  if (!f.filter.empty()) {
    params = resolve_params(parse_kind(f.filter), cfg.config, f.params);
  }
  const double bin_width = f.bin_width.value_or(cfg.config.bin_width);
  const double max_range = f.max_range.value_or(cfg.config.histogram_max_range);
  if (!(bin_width > 0.0) || !(max_range > 0.0)) {
    throw UsageError("--bin-width and --max-range must be positive");
  }
  const unsigned threads = resolve_threads(f.common.threads.value_or(0));
  const NonFinitePolicy policy = f.drop_non_finite ? NonFinitePolicy::kDrop : NonFinitePolicy::kReject;
  const auto entries = load_manifest(f.manifest);
  for (const auto& e : entries) {
    if (!e.labels) {
      throw IoError("manifest entry " + e.scan.string() + " has no label file");
    }
  }

  run.open(f.common.output_dir);
  std::vector<EvalReport> reports(entries.size());
  std::vector<std::vector<std::string>> warnings(entries.size());
  parallel_for(entries.size(), threads, [&](std::size_t i) {
    const LabeledCloud lc = load_labeled(entries[i], snow, policy);
    FilterResult result;
    if (params) {
      result = run_filter(lc.cloud(), *params, 1);
    } else {
      result = result_from_mask(lc.cloud(),
                                read_mask(fs::path(f.masks) / (entries[i].stem() + ".mask")));
    }
    reports[i] = score(lc, result, bin_width, max_range);
    reports[i].name = entries[i].stem();
    reports[i].params_used = params ? describe(*params) : "masks:" + f.masks;
    warnings[i] = result.warnings;
  });
  for (std::size_t i = 0; i < entries.size(); ++i) {
    for (const auto& w : warnings[i]) {
      run.warn(entries[i].stem() + ": " + w);
    }
    run.text(reports[i].name + ".eval.json", to_json(reports[i]) + "\n");
    run.text(reports[i].name + ".hist.csv", histogram_csv(reports[i].range_histogram));
  }
  EvalReport total = aggregate(reports);
  total.params_used = reports.front().params_used;
  run.text("aggregate.eval.json", to_json(total) + "\n");
  run.text("aggregate.hist.csv", histogram_csv(total.range_histogram));
  std::vector<EvalReport> rows = reports;
  rows.push_back(total);
  run.text("confusion.csv", confusion_csv(rows));

  auto fmt = [](const std::optional<double>& v) {
    return v ? std::to_string(*v) : std::string("n/a");
  };
  run.err() << "aggregate: precision " << fmt(total.precision()) << ", recall "
            << fmt(total.recall()) << " over " << entries.size() << " cloud(s)\n";
  run.finish("eval", cfg, threads,
             {{"params", total.params_used},
              {"snow_classes", format_snow_classes(snow)},
              {"precision", total.precision() ? json(*total.precision()) : json(nullptr)},
              {"recall", total.recall() ? json(*total.recall()) : json(nullptr)}});
}

struct BenchFlags {
  CommonFlags common;
  std::string manifest;
  std::string filters = "sor,dror,dsor";
  std::size_t reps = 1;
  std::size_t warmup = 1;
};

std::vector<PointCloud> load_clouds(const std::vector<ManifestEntry>& entries) {
  std::vector<PointCloud> clouds;
  clouds.reserve(entries.size());
  for (const auto& e : entries) {
    clouds.push_back(read_cloud(e.scan));
  }
  return clouds;
}

void cmd_bench(const BenchFlags& f, Run& run) {
  if (f.reps == 0) {
    throw UsageError("--reps must be at least 1");
  }
  const auto kinds = parse_filter_list(f.filters);
  const Loaded cfg = load(f.common);
  const unsigned threads = resolve_threads(f.common.threads.value_or(1));
  const auto clouds = load_clouds(load_manifest(f.manifest));

  run.open(f.common.output_dir);
  std::vector<TimingStats> stats;
  json all = json::array();
  for (const FilterKind kind : kinds) {
    BenchmarkOptions opts;
    opts.reps = f.reps;
    opts.warmup = f.warmup;
    opts.threads = threads;
    stats.push_back(benchmark(params_for(cfg.config, kind), clouds, opts));
    all.push_back(json::parse(to_json(stats.back())));
    run.err() << stats.back().filter << ": mean " << stats.back().mean_ms << " ms, median "
              << stats.back().median_ms << " ms\n";
  }
  run.text("timing.json", json{{"host", host_info()}, {"timings", all}}.dump(2) + "\n");
  run.text("timing.csv", timing_csv(stats));
  run.finish("bench", cfg, threads, {{"reps", f.reps}, {"warmup", f.warmup}});
}

struct ScaleFlags {
  CommonFlags common;
  ParamFlags params;
  std::string filter = "dsor";
  std::string manifest;
  std::size_t cloud_index = 0;
  std::string fractions = "0.1:1.0:10";
  std::size_t reps = 1;
  std::uint64_t seed = 0;
};

void cmd_scale(const ScaleFlags& f, Run& run) {
  const FilterKind kind = parse_kind(f.filter);
  const auto fractions = parse_fractions(f.fractions);
  if (f.reps == 0) {
    throw UsageError("--reps must be at least 1");
  }
  const Loaded cfg = load(f.common);
  const FilterParams params = resolve_params(kind, cfg.config, f.params);
  const unsigned threads = resolve_threads(f.common.threads.value_or(1));
  const auto entries = load_manifest(f.manifest);
  if (f.cloud_index >= entries.size()) {
    throw UsageError("--cloud-index " + std::to_string(f.cloud_index) + " out of range for " +
                     std::to_string(entries.size()) + " manifest entries");
  }
  const PointCloud cloud = read_cloud(entries[f.cloud_index].scan);

  run.open(f.common.output_dir);
  const ScalingFit fit =
      scalability_study(cloud, fractions, f.reps, f.seed, filter_cost(params, threads));
  run.text("scaling.json", to_json(fit) + "\n");
  run.text("scaling.csv", scaling_csv(fit));
  run.err() << filter_name(kind) << ": exponent " << fit.exponent << " (r^2 " << fit.r_squared
            << ")\n";
  run.finish("scale", cfg, threads,
             {{"filter", filter_name(kind)},
              {"params", describe(params)},
              {"fractions", fractions},
              {"seed", f.seed},
              {"reps", f.reps},
              {"host", host_info()}});
}

struct TuneFlags {
  CommonFlags common;
  std::string filter;
  std::string manifest;
  std::optional<std::string> snow_classes;
  std::optional<double> precision_floor;
  bool no_write_config = false;
};

std::vector<FilterParams> grid_for(FilterKind kind, const ToolkitConfig& config) {
  switch (kind) {
    case FilterKind::kSor: {
      SorGrid g;
      g.k = {config.sor.k};
      return expand(g);
    }
    case FilterKind::kRor:
      return expand(RorGrid{});
    case FilterKind::kDror: {
      DrorGrid g;
      g.azimuth_resolution = {config.dror.azimuth_resolution};
      return expand(g);
    }
    case FilterKind::kDsor:
      break;
  }
  DsorGrid g;
  g.k = {config.dsor.k};
  return expand(g);
}

void cmd_tune(const TuneFlags& f, Run& run) {
  const FilterKind kind = parse_kind(f.filter);
  Loaded cfg = load(f.common);
  const SnowClassSet snow = resolve_snow_classes(f.snow_classes, cfg.config);
  const double floor = f.precision_floor.value_or(cfg.config.precision_floor);
  if (!(floor >= 0.0 && floor <= 1.0)) {
    throw UsageError("--precision-floor must lie in [0, 1]");
  }
  const unsigned threads = resolve_threads(f.common.threads.value_or(0));
  const auto entries = load_manifest(f.manifest);
  std::vector<LabeledCloud> corpus;
  corpus.reserve(entries.size());
  for (const auto& e : entries) {
    corpus.push_back(load_labeled(e, snow));
  }

  run.open(f.common.output_dir);
  const auto grid = grid_for(kind, cfg.config);
  const TuneResult result = tune(grid, corpus, TuneOptions{floor, threads});
  for (const auto& w : result.warnings) {
    run.warn(w);
  }
  run.text("tune.json", to_json(result) + "\n");
  run.text("tune.csv", tune_csv(result));

  set_params(cfg.config, result.chosen().params);
  cfg.config.snow_classes = snow;
  cfg.config.precision_floor = floor;
  run.text("tuned.ini", format_config(cfg.config));
  if (cfg.path && !f.no_write_config) {
    save_config(cfg.config, *cfg.path);
    run.err() << "updated " << cfg.path->string() << '\n';
  }
  run.err() << "chosen " << describe(result.chosen().params) << '\n';
  run.finish("tune", cfg, threads,
             {{"filter", filter_name(kind)},
              {"chosen", describe(result.chosen().params)},
              {"met_floor", result.met_floor}});
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Snow de-noising filters for LiDAR point clouds", "dsor"};
  app.require_subcommand(1);
  app.set_version_flag("--version", DSOR_TOOL_VERSION);

  SynthFlags synth;
  auto* synth_cmd = app.add_subcommand("synth", "generate a labeled synthetic snow corpus");
  add_common(*synth_cmd, synth.common, true);
  synth_cmd->add_option("--clouds", synth.clouds, "number of clouds")->capture_default_str();
  synth_cmd->add_option("--seed", synth.seed, "corpus seed")->capture_default_str();
  synth_cmd->add_option("--snow-count", synth.snow_count, "snow points per cloud");
  synth_cmd->add_option("--azimuth-step", synth.azimuth_step, "sensor azimuth step in degrees");

  FilterFlags filter;
  auto* filter_cmd = app.add_subcommand("filter", "filter scans and write kept/removed clouds");
  add_common(*filter_cmd, filter.common, true);
  add_params(*filter_cmd, filter.params);
  filter_cmd->add_option("name", filter.filter, "sor | ror | dror | dsor")->required();
  filter_cmd->add_option("-i,--input", filter.inputs, "scan file(s)");
  filter_cmd->add_option("--manifest", filter.manifest, "corpus manifest");
  filter_cmd->add_flag("--no-removed", filter.no_removed, "do not write removed clouds");
  filter_cmd->add_flag("--drop-non-finite", filter.drop_non_finite,
                       "skip NaN/Inf records instead of failing");

  EvalFlags eval;
  auto* eval_cmd = app.add_subcommand("eval", "score a filter against point labels");
  add_common(*eval_cmd, eval.common, true);
  add_params(*eval_cmd, eval.params);
  eval_cmd->add_option("name", eval.filter, "filter to run (omit with --masks)");
  eval_cmd->add_option("--manifest", eval.manifest, "corpus manifest with labels")->required();
  eval_cmd->add_option("--masks", eval.masks, "directory of <stem>.mask files to score instead");
  eval_cmd->add_option("--snow-classes", eval.snow_classes,
                       "comma-separated semantic classes counted as snow");
  eval_cmd->add_option("--bin-width", eval.bin_width, "range histogram bin width in m");
  eval_cmd->add_option("--max-range", eval.max_range, "start of the overflow range bin in m");
  eval_cmd->add_flag("--drop-non-finite", eval.drop_non_finite,
                     "skip NaN/Inf records instead of failing");

  BenchFlags bench;
  auto* bench_cmd = app.add_subcommand("bench", "time filters over a corpus");
  add_common(*bench_cmd, bench.common, true);
  bench_cmd->add_option("--manifest", bench.manifest, "corpus manifest")->required();
  bench_cmd->add_option("--filters", bench.filters, "comma-separated filters")->capture_default_str();
  bench_cmd->add_option("--reps", bench.reps, "measured runs per cloud")->capture_default_str();
  bench_cmd->add_option("--warmup", bench.warmup, "discarded runs")->capture_default_str();

  ScaleFlags scale;
  auto* scale_cmd = app.add_subcommand("scale", "runtime versus cloud size with a power-law fit");
  add_common(*scale_cmd, scale.common, true);
  add_params(*scale_cmd, scale.params);
  scale_cmd->add_option("--filter", scale.filter, "filter to time")->capture_default_str();
  scale_cmd->add_option("--manifest", scale.manifest, "corpus manifest")->required();
  scale_cmd->add_option("--cloud-index", scale.cloud_index, "manifest entry to subsample")
      ->capture_default_str();
  scale_cmd->add_option("--fractions", scale.fractions, "first:last:count or a comma list")
      ->capture_default_str();
  scale_cmd->add_option("--reps", scale.reps, "runs per fraction (median kept)")
      ->capture_default_str();
  scale_cmd->add_option("--seed", scale.seed, "subsampling seed")->capture_default_str();

  TuneFlags tune_f;
  auto* tune_cmd = app.add_subcommand("tune", "grid-search filter parameters on a labeled corpus");
  add_common(*tune_cmd, tune_f.common, true);
  tune_cmd->add_option("name", tune_f.filter, "sor | ror | dror | dsor")->required();
  tune_cmd->add_option("--manifest", tune_f.manifest, "corpus manifest with labels")->required();
  tune_cmd->add_option("--snow-classes", tune_f.snow_classes,
                       "comma-separated semantic classes counted as snow");
  tune_cmd->add_option("--precision-floor", tune_f.precision_floor, "minimum precision");
  tune_cmd->add_flag("--no-write-config", tune_f.no_write_config,
                     "leave the config file unchanged");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  if (!reversed.empty()) {
    reversed.pop_back();  // program name
  }
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  Run record(args, out, err);
  try {
    if (synth_cmd->parsed()) {
      cmd_synth(synth, record);
    } else if (filter_cmd->parsed()) {
      cmd_filter(filter, record);
    } else if (eval_cmd->parsed()) {
      cmd_eval(eval, record);
    } else if (bench_cmd->parsed()) {
      cmd_bench(bench, record);
    } else if (scale_cmd->parsed()) {
      cmd_scale(scale, record);
    } else if (tune_cmd->parsed()) {
      cmd_tune(tune_f, record);
    }
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\nRun 'dsor --help' for usage.\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitOk;
}

}  // namespace dsor::cli
