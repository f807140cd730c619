// Copyright 2026 The DSOR Toolkit Authors
// SPDX-License-Identifier: Apache-2.0

#include "dsor/report_io.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

#include "json.hpp"

namespace dsor {

using nlohmann::json;

namespace {

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

// JSON has no infinity; the overflow bin's open end is written as null.
json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

double number_or_inf(const json& j) {
  return j.is_null() ? std::numeric_limits<double>::infinity() : j.get<double>();
}

json confusion_json(const Confusion& c) {
  return {{"tp", c.tp}, {"fp", c.fp}, {"fn", c.fn}, {"tn", c.tn}};
}

Confusion confusion_from(const json& j) {
  return {j.at("tp").get<std::size_t>(), j.at("fp").get<std::size_t>(),
          j.at("fn").get<std::size_t>(), j.at("tn").get<std::size_t>()};
}

json params_json(const FilterParams& params) {
  json j;
  j["filter"] = std::string(filter_name(kind_of(params)));
  std::visit(
      [&](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, SorParams>) {
          j["k"] = p.k;
          j["s"] = p.s;
        } else if constexpr (std::is_same_v<T, RorParams>) {
          j["radius"] = p.radius;
          j["min_neighbors"] = p.min_neighbors;
        } else if constexpr (std::is_same_v<T, DrorParams>) {
          j["azimuth_resolution"] = p.azimuth_resolution;
          j["beta"] = p.beta;
          j["sr_min"] = p.sr_min;
          j["min_neighbors"] = p.min_neighbors;
        } else {
          j["k"] = p.k;
          j["s"] = p.s;
          j["r"] = p.r;
        }
      },
      params);
  return j;
}

json parse(std::string_view text) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw MalformedFileError(std::string("invalid report JSON: ") + e.what());
  }
}

template <typename Fn>
auto decode(std::string_view text, Fn&& fn) {
  const json j = parse(text);
  try {
    return fn(j);
  } catch (const json::exception& e) {
    throw MalformedFileError(std::string("unexpected report layout: ") + e.what());
  }
}

std::string csv_optional(const std::optional<double>& v) {
  if (!v) {
    return "";
  }
  std::ostringstream out;
  out << std::setprecision(17) << *v;
  return out.str();
}

// Quotes a CSV field when it contains separators.
std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) {
    return s;
  }
  std::string out = "\"";
  for (const char c : s) {
    out += c == '"' ? std::string("\"\"") : std::string(1, c);
  }
  return out + "\"";
}

}  // namespace

std::string to_json(const EvalReport& report) {
  json bins = json::array();
  for (const auto& b : report.range_histogram) {
    bins.push_back({{"bin_start", b.bin_start},
                    {"bin_end", finite_or_null(b.bin_end)},
                    {"total", b.total},
                    {"removed", b.removed},
                    {"pct_removed", optional_number(b.pct_removed())}});
  }
  const json j = {{"name", report.name},
                  {"params", report.params_used},
                  {"confusion", confusion_json(report.confusion)},
                  {"precision", optional_number(report.precision())},
                  {"recall", optional_number(report.recall())},
                  {"range_histogram", bins}};
  return j.dump(2);
}

EvalReport eval_report_from_json(std::string_view text) {
  return decode(text, [](const json& j) {
    EvalReport r;
    r.name = j.at("name").get<std::string>();
    r.params_used = j.at("params").get<std::string>();
    r.confusion = confusion_from(j.at("confusion"));
    for (const auto& b : j.at("range_histogram")) {
      r.range_histogram.push_back({b.at("bin_start").get<double>(), number_or_inf(b.at("bin_end")),
                                   b.at("total").get<std::size_t>(),
                                   b.at("removed").get<std::size_t>()});
    }
    return r;
  });
}

std::string to_json(const TimingStats& s) {
  const json j = {{"filter", s.filter},
                  {"params", s.params},
                  {"mean_ms", s.mean_ms},
                  {"stddev_ms", s.stddev_ms},
                  {"median_ms", s.median_ms},
                  {"reps", s.reps},
                  {"warmup", s.warmup},
                  {"measurements", s.measurements},
                  {"mean_cloud_size", s.mean_cloud_size},
                  {"threads", s.threads},
                  {"samples_ms", s.samples_ms}};
  return j.dump(2);
}

TimingStats timing_from_json(std::string_view text) {
  return decode(text, [](const json& j) {
    TimingStats s;
    s.filter = j.at("filter").get<std::string>();
    s.params = j.at("params").get<std::string>();
    s.mean_ms = j.at("mean_ms").get<double>();
    s.stddev_ms = j.at("stddev_ms").get<double>();
    s.median_ms = j.at("median_ms").get<double>();
    s.reps = j.at("reps").get<std::size_t>();
    s.warmup = j.at("warmup").get<std::size_t>();
    s.measurements = j.at("measurements").get<std::size_t>();
    s.mean_cloud_size = j.at("mean_cloud_size").get<double>();
    s.threads = j.at("threads").get<unsigned>();
    s.samples_ms = j.at("samples_ms").get<std::vector<double>>();
    return s;
  });
}

std::string to_json(const ScalingFit& fit) {
  json samples = json::array();
  for (std::size_t i = 0; i < fit.samples.size(); ++i) {
    samples.push_back({{"n", fit.samples[i].n},
                       {"time_ms", fit.samples[i].time_ms},
                       {"residual", i < fit.residuals.size() ? fit.residuals[i] : 0.0}});
  }
  const json j = {{"exponent", fit.exponent},
                  {"coefficient", fit.coefficient},
                  {"r_squared", fit.r_squared},
                  {"samples", samples}};
  return j.dump(2);
}

ScalingFit scaling_fit_from_json(std::string_view text) {
  return decode(text, [](const json& j) {
    ScalingFit fit;
    fit.exponent = j.at("exponent").get<double>();
    fit.coefficient = j.at("coefficient").get<double>();
    fit.r_squared = j.at("r_squared").get<double>();
    for (const auto& s : j.at("samples")) {
      fit.samples.push_back({s.at("n").get<std::size_t>(), s.at("time_ms").get<double>()});
      fit.residuals.push_back(s.at("residual").get<double>());
    }
    return fit;
  });
}

std::string to_json(const TuneResult& result) {
  json cands = json::array();
  for (const auto& c : result.candidates) {
    cands.push_back({{"params", params_json(c.params)},
                     {"confusion", confusion_json(c.confusion)},
                     {"precision", optional_number(c.confusion.precision())},
                     {"recall", optional_number(c.confusion.recall())}});
  }
  const auto& best = result.chosen();
  const json j = {{"precision_floor", result.precision_floor},
                  {"met_floor", result.met_floor},
                  {"best_index", result.best},
                  {"best", params_json(best.params)},
                  {"best_precision", optional_number(best.confusion.precision())},
                  {"best_recall", optional_number(best.confusion.recall())},
                  {"warnings", result.warnings},
                  {"candidates", cands}};
  return j.dump(2);
}

std::string histogram_csv(const RangeHistogram& histogram) {
  std::ostringstream out;
  out << std::setprecision(17);
  out << "bin_start,bin_end,total,removed,pct_removed\n";
  for (const auto& b : histogram) {
    out << b.bin_start << ',';
    if (std::isfinite(b.bin_end)) {
      out << b.bin_end;
    } else {
      out << "inf";
    }
    out << ',' << b.total << ',' << b.removed << ',' << csv_optional(b.pct_removed()) << '\n';
  }
  return out.str();
}

std::string confusion_csv(std::span<const EvalReport> reports) {
  std::ostringstream out;
  out << "name,tp,fp,fn,tn,precision,recall\n";
  for (const auto& r : reports) {
    const auto& c = r.confusion;
    out << csv_field(r.name) << ',' << c.tp << ',' << c.fp << ',' << c.fn << ',' << c.tn << ','
        << csv_optional(r.precision()) << ',' << csv_optional(r.recall()) << '\n';
  }
  return out.str();
}

std::string timing_csv(std::span<const TimingStats> stats) {
  std::ostringstream out;
  out << std::setprecision(17);
  out << "filter,params,mean_ms,stddev_ms,median_ms,measurements,mean_cloud_size,threads\n";
  for (const auto& s : stats) {
    out << s.filter << ',' << csv_field(s.params) << ',' << s.mean_ms << ',' << s.stddev_ms << ','
        << s.median_ms << ',' << s.measurements << ',' << s.mean_cloud_size << ',' << s.threads
        << '\n';
  }
  return out.str();
}

std::string scaling_csv(const ScalingFit& fit) {
  std::ostringstream out;
  out << std::setprecision(17);
  out << "n,time_ms,residual\n";
  for (std::size_t i = 0; i < fit.samples.size(); ++i) {
    out << fit.samples[i].n << ',' << fit.samples[i].time_ms << ','
        << (i < fit.residuals.size() ? fit.residuals[i] : 0.0) << '\n';
  }
  return out.str();
}

std::string tune_csv(const TuneResult& result) {
  std::ostringstream out;
  out << "params,tp,fp,fn,tn,precision,recall,chosen\n";
  for (std::size_t g = 0; g < result.candidates.size(); ++g) {
    const auto& c = result.candidates[g];
    out << csv_field(describe(c.params)) << ',' << c.confusion.tp << ',' << c.confusion.fp << ','
        << c.confusion.fn << ',' << c.confusion.tn << ',' << csv_optional(c.confusion.precision())
        << ',' << csv_optional(c.confusion.recall()) << ',' << (g == result.best ? 1 : 0) << '\n';
  }
  return out.str();
}

std::string diagnostics_csv(const FilterResult& result) {
  std::ostringstream out;
  out << std::setprecision(9);
  out << "index,range,mean_knn_distance,threshold,kept\n";
  for (std::size_t i = 0; i < result.size(); ++i) {
    out << i << ',' << result.range[i] << ',';
    if (std::isfinite(result.mean_knn_distance[i])) {
      out << result.mean_knn_distance[i];
    }
    out << ',' << result.threshold[i] << ',' << static_cast<int>(result.keep_mask[i]) << '\n';
  }
  return out.str();
}

void write_text(std::string_view text, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw IoError("cannot open " + path.string() + " for writing");
  }
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) {
    throw IoError("write failed on " + path.string());
  }
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open " + path.string());
  }
  std::ostringstream text;
  text << in.rdbuf();
  return text.str();
}

}  // namespace dsor
