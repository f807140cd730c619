// Copyright 2026 The DSOR Toolkit Authors
// SPDX-License-Identifier: Apache-2.0

#include "dsor/cloud_io.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

namespace dsor {

namespace fs = std::filesystem;

LabeledCloud::LabeledCloud(PointCloud cloud, LabelVector labels, SnowClassSet snow_classes)
    : cloud_(std::move(cloud)), labels_(std::move(labels)), snow_classes_(std::move(snow_classes)) {
  if (cloud_.size() != labels_.size()) {
    throw LengthMismatchError("label count " + std::to_string(labels_.size()) +
                              " does not match point count " + std::to_string(cloud_.size()));
  }
}

std::size_t LabeledCloud::snow_count() const {
  std::size_t n = 0;
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    n += is_snow(i) ? 1 : 0;
  }
  return n;
}

LabeledCloud attach_labels(PointCloud cloud, LabelVector labels, SnowClassSet snow_classes) {
  return LabeledCloud(std::move(cloud), std::move(labels), std::move(snow_classes));
}

namespace {

static_assert(sizeof(float) == 4 && std::numeric_limits<float>::is_iec559);

std::uint32_t load_u32_le(const std::byte* p) {
  std::uint32_t v = 0;
  std::memcpy(&v, p, 4);
  if constexpr (std::endian::native == std::endian::big) {
    v = __builtin_bswap32(v);
  }
  return v;
}

void store_u32_le(std::uint32_t v, std::byte* p) {
  if constexpr (std::endian::native == std::endian::big) {
    v = __builtin_bswap32(v);
  }
  std::memcpy(p, &v, 4);
}

float load_f32_le(const std::byte* p) { return std::bit_cast<float>(load_u32_le(p)); }
void store_f32_le(float v, std::byte* p) { store_u32_le(std::bit_cast<std::uint32_t>(v), p); }

std::vector<std::byte> read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open " + path.string());
  }
  in.seekg(0, std::ios::end);
  const auto size = static_cast<std::streamoff>(in.tellg());
  if (size < 0) {
    throw IoError("cannot determine size of " + path.string());
  }
  in.seekg(0, std::ios::beg);
  std::vector<std::byte> bytes(static_cast<std::size_t>(size));
  if (size > 0 && !in.read(reinterpret_cast<char*>(bytes.data()), size)) {
    throw IoError("short read on " + path.string());
  }
  return bytes;
}

void write_file(std::span<const std::byte> bytes, const fs::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw IoError("cannot open " + path.string() + " for writing");
  }
  if (!bytes.empty()) {
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
  }
  out.flush();
  if (!out) {
    throw IoError("write failed on " + path.string());
  }
}

}  // namespace

PointCloud decode_cloud(std::span<const std::byte> bytes, NonFinitePolicy policy,
                        CloudReadStats* stats) {
  if (bytes.size() % kScanRecordBytes != 0) {
    throw MalformedFileError("scan size " + std::to_string(bytes.size()) +
                             " bytes is not a multiple of " + std::to_string(kScanRecordBytes));
  }
  const std::size_t n = bytes.size() / kScanRecordBytes;
  PointCloud cloud;
  cloud.points.reserve(n);
  std::size_t dropped = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const std::byte* rec = bytes.data() + i * kScanRecordBytes;
    const Point p{load_f32_le(rec), load_f32_le(rec + 4), load_f32_le(rec + 8),
                  load_f32_le(rec + 12)};
    if (!p.finite()) {
      if (policy == NonFinitePolicy::kReject) {
        throw MalformedFileError("non-finite coordinate in record " + std::to_string(i));
      }
      ++dropped;
      continue;
    }
    cloud.points.push_back(p);
  }
  if (stats != nullptr) {
    stats->records = n;
    stats->dropped_non_finite = dropped;
  }
  return cloud;
}

std::vector<std::byte> encode_cloud(const PointCloud& cloud) {
  std::vector<std::byte> bytes(cloud.size() * kScanRecordBytes);
  std::byte* out = bytes.data();
  for (const Point& p : cloud.points) {
    store_f32_le(p.x, out);
    store_f32_le(p.y, out + 4);
    store_f32_le(p.z, out + 8);
    store_f32_le(p.intensity, out + 12);
    out += kScanRecordBytes;
  }
  return bytes;
}

PointCloud read_cloud(const fs::path& path, NonFinitePolicy policy, CloudReadStats* stats) {
  const auto bytes = read_file(path);
  try {
    return decode_cloud(bytes, policy, stats);
  } catch (const MalformedFileError& e) {
    throw MalformedFileError(path.string() + ": " + e.what());
  }
}

void write_cloud(const PointCloud& cloud, const fs::path& path) {
  write_file(encode_cloud(cloud), path);
}

LabelVector decode_labels(std::span<const std::byte> bytes) {
  if (bytes.size() % kLabelRecordBytes != 0) {
    throw MalformedFileError("label size " + std::to_string(bytes.size()) +
                             " bytes is not a multiple of " + std::to_string(kLabelRecordBytes));
  }
  LabelVector labels(bytes.size() / kLabelRecordBytes);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    labels[i] = load_u32_le(bytes.data() + i * kLabelRecordBytes);
  }
  return labels;
}

std::vector<std::byte> encode_labels(const LabelVector& labels) {
  std::vector<std::byte> bytes(labels.size() * kLabelRecordBytes);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    store_u32_le(labels[i], bytes.data() + i * kLabelRecordBytes);
  }
  return bytes;
}

LabelVector read_labels(const fs::path& path) {
  const auto bytes = read_file(path);
  try {
    return decode_labels(bytes);
  } catch (const MalformedFileError& e) {
    throw MalformedFileError(path.string() + ": " + e.what());
  }
}

void write_labels(const LabelVector& labels, const fs::path& path) {
  write_file(encode_labels(labels), path);
}

void write_mask(std::span<const std::uint8_t> mask, const fs::path& path) {
  write_file(std::as_bytes(mask), path);
}

std::vector<std::uint8_t> read_mask(const fs::path& path) {
  const auto bytes = read_file(path);
  std::vector<std::uint8_t> mask(bytes.size());
  for (std::size_t i = 0; i < bytes.size(); ++i) {
    const auto v = static_cast<std::uint8_t>(bytes[i]);
    if (v > 1) {
      throw MalformedFileError(path.string() + ": mask byte " + std::to_string(i) +
                               " is neither 0 nor 1");
    }
    mask[i] = v;
  }
  return mask;
}

std::vector<ManifestEntry> read_manifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open manifest " + path.string());
  }
  const fs::path base = path.parent_path();
  auto resolve = [&](const std::string& p) {
    fs::path q(p);
    return q.is_absolute() ? q : base / q;
  };

  std::vector<ManifestEntry> entries;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream fields(line);
    std::string scan;
    std::string labels;
    std::string extra;
    if (!(fields >> scan) || scan.front() == '#') {
      continue;
    }
    ManifestEntry entry{resolve(scan), std::nullopt};
    if (fields >> labels) {
      entry.labels = resolve(labels);
    }
    if (fields >> extra) {
      throw MalformedFileError(path.string() + ":" + std::to_string(line_no) +
                               ": expected '<scan> [<labels>]'");
    }
    entries.push_back(std::move(entry));
  }
  return entries;
}

void write_manifest(std::span<const ManifestEntry> entries, const fs::path& path) {
  const fs::path base = path.parent_path().empty() ? fs::path(".") : path.parent_path();
  auto rel = [&](const fs::path& p) {
    const fs::path r = p.lexically_relative(base);
    return (r.empty() || *r.begin() == "..") ? p.generic_string() : r.generic_string();
  };

  std::ostringstream out;
  out << "# scan labels\n";
  for (const auto& e : entries) {
    if (e.scan.string().find_first_of(" \t") != std::string::npos) {
      throw InvalidArgumentError("manifest paths may not contain whitespace: " + e.scan.string());
    }
    out << rel(e.scan);
    if (e.labels) {
      out << ' ' << rel(*e.labels);
    }
    out << '\n';
  }
  const std::string text = out.str();
  write_file(std::as_bytes(std::span(text.data(), text.size())), path);
}

std::vector<ManifestEntry> pair_directory(const fs::path& root) {
  const fs::path scans = root / "velodyne";
  const fs::path labels = root / "labels";
  if (!fs::is_directory(scans)) {
    throw IoError("no velodyne/ directory under " + root.string());
  }
  std::map<std::string, ManifestEntry> by_stem;
  for (const auto& de : fs::directory_iterator(scans)) {
    if (de.is_regular_file() && de.path().extension() == ".bin") {
      ManifestEntry e{de.path(), std::nullopt};
      const fs::path label = labels / (de.path().stem().string() + ".label");
      if (fs::is_regular_file(label)) {
        e.labels = label;
      }
      by_stem.emplace(de.path().stem().string(), std::move(e));
    }
  }
  std::vector<ManifestEntry> out;
  out.reserve(by_stem.size());
  for (auto& [stem, e] : by_stem) {
    out.push_back(std::move(e));
  }
  return out;
}

LabeledCloud load_labeled(const ManifestEntry& entry, const SnowClassSet& snow_classes,
                          NonFinitePolicy policy) {
  if (!entry.labels) {
    throw IoError("no label file for " + entry.scan.string());
  }
  if (policy == NonFinitePolicy::kDrop) {
    // Dropping points would break index alignment with the label file, so
    // filter both together.
    const auto bytes = read_file(entry.scan);
    if (bytes.size() % kScanRecordBytes != 0) {
      throw MalformedFileError(entry.scan.string() + ": scan size is not a multiple of 16");
    }
    const LabelVector all_labels = read_labels(*entry.labels);
    if (bytes.size() / kScanRecordBytes != all_labels.size()) {
      throw LengthMismatchError("label count " + std::to_string(all_labels.size()) +
                                " does not match point count " +
                                std::to_string(bytes.size() / kScanRecordBytes) + " for " +
                                entry.scan.string());
    }
    PointCloud cloud;
    LabelVector kept;
    for (std::size_t i = 0; i < all_labels.size(); ++i) {
      const std::byte* rec = bytes.data() + i * kScanRecordBytes;
      const Point p{load_f32_le(rec), load_f32_le(rec + 4), load_f32_le(rec + 8),
                    load_f32_le(rec + 12)};
      if (p.finite()) {
        cloud.points.push_back(p);
        kept.push_back(all_labels[i]);
      }
    }
    return attach_labels(std::move(cloud), std::move(kept), snow_classes);
  }
  return attach_labels(read_cloud(entry.scan, policy), read_labels(*entry.labels), snow_classes);
}

}  // namespace dsor
