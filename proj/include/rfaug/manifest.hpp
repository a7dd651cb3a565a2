#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "rfaug/iq.hpp"

namespace rfaug {

inline constexpr std::string_view kManifestFormat = "cf32le";

struct ManifestHeader {
  int num_transmitters = 0;
  double sample_rate_hz = 0.0;
  std::size_t window_len = 256;
  std::string format{kManifestFormat};

  friend bool operator==(const ManifestHeader&, const ManifestHeader&) = default;
};

struct ManifestRecord {
  std::filesystem::path path;  // relative to the manifest's directory unless absolute
  RecordingMeta meta;

  friend bool operator==(const ManifestRecord&, const ManifestRecord&) = default;
};

/// File-backed dataset index. Serialized as CSV with a '#' header block:
///
///   # rfaug-manifest v1
///   # num_tx=4
///   # sample_rate_hz=20000000
///   # window_len=256
///   # format=cf32le
///   path,waveform,tx_id,day,provenance,policy,seed
///   day1/tx0_FiveG_b0.bin,FiveG,0,Day1,Original,,
struct DatasetManifest {
  ManifestHeader header;
  std::vector<ManifestRecord> records;

  friend bool operator==(const DatasetManifest&, const DatasetManifest&) = default;
};

/// Parses the text form. Structural errors carry the 1-based line number.
/// Does not touch the filesystem.
DatasetManifest parse_manifest(std::istream& in);
void format_manifest(const DatasetManifest& manifest, std::ostream& out);

/// Reads, parses and validates: every referenced file must exist and hold a
/// whole number of I/Q records.
DatasetManifest read_manifest(const std::filesystem::path& path);
void write_manifest(const DatasetManifest& manifest, const std::filesystem::path& path);

/// Header and label checks (transmitter ids, window length). No file access.
void validate_manifest_fields(const DatasetManifest& manifest);
/// Field checks plus existence and size of every referenced file.
void validate_manifest_files(const DatasetManifest& manifest, const std::filesystem::path& base_dir);

std::filesystem::path resolve_record_path(const std::filesystem::path& manifest_dir,
                                          const std::filesystem::path& record_path);

}  // namespace rfaug
