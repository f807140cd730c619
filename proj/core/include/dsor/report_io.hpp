// Copyright 2026 The DSOR Toolkit Authors
// SPDX-License-Identifier: Apache-2.0
//
// JSON (machine-readable, lossless) and CSV (plot-ready) renderings of the
// evaluation reports. Doubles are written with round-trip precision, absent
// precision/recall/percentages as JSON null and as empty CSV cells.

#ifndef DSOR_REPORT_IO_HPP_
#define DSOR_REPORT_IO_HPP_

#include <filesystem>
#include <span>
#include <string>
#include <string_view>

#include "dsor/eval.hpp"
#include "dsor/filters.hpp"

namespace dsor {

[[nodiscard]] std::string to_json(const EvalReport& report);
[[nodiscard]] std::string to_json(const TimingStats& stats);
[[nodiscard]] std::string to_json(const ScalingFit& fit);
[[nodiscard]] std::string to_json(const TuneResult& result);

[[nodiscard]] EvalReport eval_report_from_json(std::string_view json);
[[nodiscard]] TimingStats timing_from_json(std::string_view json);
[[nodiscard]] ScalingFit scaling_fit_from_json(std::string_view json);

/// One row per range bin: bin_start,bin_end,total,removed,pct_removed.
[[nodiscard]] std::string histogram_csv(const RangeHistogram& histogram);
/// One row per report: name,tp,fp,fn,tn,precision,recall.
[[nodiscard]] std::string confusion_csv(std::span<const EvalReport> reports);
/// One row per filter: filter,params,mean_ms,stddev_ms,median_ms,measurements,mean_cloud_size,threads.
[[nodiscard]] std::string timing_csv(std::span<const TimingStats> stats);
/// One row per size sample: n,time_ms,residual.
[[nodiscard]] std::string scaling_csv(const ScalingFit& fit);
/// One row per grid entry: params,tp,fp,fn,tn,precision,recall,chosen.
[[nodiscard]] std::string tune_csv(const TuneResult& result);

/// Per-point diagnostics: index,range,mean_knn_distance,threshold,kept.
[[nodiscard]] std::string diagnostics_csv(const FilterResult& result);

void write_text(std::string_view text, const std::filesystem::path& path);
[[nodiscard]] std::string read_text(const std::filesystem::path& path);

}  // namespace dsor

#endif  // DSOR_REPORT_IO_HPP_
