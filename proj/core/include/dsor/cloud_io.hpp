// Copyright 2026 The DSOR Toolkit Authors
// SPDX-License-Identifier: Apache-2.0
//
// KITTI velodyne scans (.bin) and SemanticKITTI label files (.label).
//
// Scan layout: N consecutive 16-byte records, each four little-endian IEEE-754
// float32 values (x, y, z, intensity). Label layout: N little-endian uint32
// words. Both are read and written little-endian on any host.

#ifndef DSOR_CLOUD_IO_HPP_
#define DSOR_CLOUD_IO_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dsor/point_cloud.hpp"

namespace dsor {

inline constexpr std::size_t kScanRecordBytes = 16;
inline constexpr std::size_t kLabelRecordBytes = 4;

/// What read_cloud does with records holding NaN or infinite coordinates.
enum class NonFinitePolicy {
  kReject,  ///< throw MalformedFileError (default)
  kDrop,    ///< skip the record and count it
};

struct CloudReadStats {
  std::size_t records = 0;
  std::size_t dropped_non_finite = 0;
};

[[nodiscard]] PointCloud read_cloud(const std::filesystem::path& path,
                                    NonFinitePolicy policy = NonFinitePolicy::kReject,
                                    CloudReadStats* stats = nullptr);
void write_cloud(const PointCloud& cloud, const std::filesystem::path& path);

/// In-memory codec used by the file functions; exposed for tests and tools.
[[nodiscard]] PointCloud decode_cloud(std::span<const std::byte> bytes,
                                      NonFinitePolicy policy = NonFinitePolicy::kReject,
                                      CloudReadStats* stats = nullptr);
[[nodiscard]] std::vector<std::byte> encode_cloud(const PointCloud& cloud);

[[nodiscard]] LabelVector read_labels(const std::filesystem::path& path);
void write_labels(const LabelVector& labels, const std::filesystem::path& path);

[[nodiscard]] LabelVector decode_labels(std::span<const std::byte> bytes);
[[nodiscard]] std::vector<std::byte> encode_labels(const LabelVector& labels);

/// Per-point keep mask, one byte per point (1 = kept, 0 = removed).
void write_mask(std::span<const std::uint8_t> mask, const std::filesystem::path& path);
[[nodiscard]] std::vector<std::uint8_t> read_mask(const std::filesystem::path& path);

/// One corpus entry: a scan and, optionally, its label file.
struct ManifestEntry {
  std::filesystem::path scan;
  std::optional<std::filesystem::path> labels;

  /// File stem shared by the scan and label ("000042").
  [[nodiscard]] std::string stem() const { return scan.stem().string(); }

  friend bool operator==(const ManifestEntry&, const ManifestEntry&) = default;
};

/// Plain-text manifest: one entry per line, "<scan> [<labels>]", separated by
/// whitespace. Blank lines and lines starting with '#' are ignored. Relative
/// paths resolve against the manifest's directory.
[[nodiscard]] std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path);

/// Writes paths relative to the manifest's directory when they live under it.
void write_manifest(std::span<const ManifestEntry> entries, const std::filesystem::path& path);

/// Pairs root/velodyne/XXXXXX.bin with root/labels/XXXXXX.label by stem,
/// sorted by stem. Scans without a label file get an empty labels field.
[[nodiscard]] std::vector<ManifestEntry> pair_directory(const std::filesystem::path& root);

/// Loads a manifest entry. Throws when the entry has no label file.
[[nodiscard]] LabeledCloud load_labeled(const ManifestEntry& entry, const SnowClassSet& snow_classes,
                                        NonFinitePolicy policy = NonFinitePolicy::kReject);

}  // namespace dsor

#endif  // DSOR_CLOUD_IO_HPP_
