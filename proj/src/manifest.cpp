#include "rfaug/manifest.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "rfaug/config.hpp"
#include "rfaug/error.hpp"

namespace rfaug {

namespace {

constexpr std::string_view kMagic = "rfaug-manifest v1";
constexpr std::string_view kColumns = "path,waveform,tx_id,day,provenance,policy,seed";

std::string at_line(std::size_t line, const std::string& what) {
  return "manifest line " + std::to_string(line) + ": " + what;
}

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_commas(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    if (comma == std::string::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return fields;
}

template <typename T>
T parse_number(const std::string& text, std::size_t line, const char* field) {
  T value{};
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end || text.empty()) {
    fail(ErrorKind::Parse, at_line(line, std::string("bad ") + field + " '" + text + "'"));
  }
  return value;
}

}  // namespace

DatasetManifest parse_manifest(std::istream& in) {
  DatasetManifest manifest;
  bool saw_magic = false;
  bool saw_num_tx = false;
  bool saw_rate = false;
  bool saw_window = false;
  bool saw_columns = false;

  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = trim(raw);
    if (line.empty()) continue;

    if (line.front() == '#') {
      if (saw_columns) fail(ErrorKind::Parse, at_line(line_no, "header after column row"));
      const std::string body = trim(std::string_view(line).substr(1));
      if (body == kMagic) {
        saw_magic = true;
        continue;
      }
      const auto eq = body.find('=');
      if (eq == std::string::npos) fail(ErrorKind::Parse, at_line(line_no, "expected key=value"));
      const std::string key = trim(std::string_view(body).substr(0, eq));
      const std::string value = trim(std::string_view(body).substr(eq + 1));
      if (key == "num_tx") {
        manifest.header.num_transmitters = parse_number<int>(value, line_no, "num_tx");
        saw_num_tx = true;
      } else if (key == "sample_rate_hz") {
        manifest.header.sample_rate_hz = parse_number<double>(value, line_no, "sample_rate_hz");
        saw_rate = true;
      } else if (key == "window_len") {
        manifest.header.window_len = parse_number<std::size_t>(value, line_no, "window_len");
        saw_window = true;
      } else if (key == "format") {
        manifest.header.format = value;
      } else {
        fail(ErrorKind::Parse, at_line(line_no, "unknown header key '" + key + "'"));
      }
      continue;
    }

    if (!saw_columns) {
      if (line != kColumns) fail(ErrorKind::Parse, at_line(line_no, "expected column row"));
      saw_columns = true;
      continue;
    }

    const auto fields = split_commas(line);
    if (fields.size() != 7) {
      fail(ErrorKind::Parse, at_line(line_no, "expected 7 fields, got " +
                                                  std::to_string(fields.size())));
    }
    ManifestRecord record;
    if (fields[0].empty()) fail(ErrorKind::Parse, at_line(line_no, "empty path"));
    record.path = fields[0];
    try {
      record.meta.waveform = parse_waveform(fields[1]);
      record.meta.day = parse_day(fields[3]);
    } catch (const Error& e) {
      fail(ErrorKind::Parse, at_line(line_no, e.what()));
    }
    record.meta.transmitter_id = parse_number<int>(fields[2], line_no, "tx_id");
    if (fields[4] == "Original") {
      if (!fields[5].empty() || !fields[6].empty()) {
        fail(ErrorKind::Parse, at_line(line_no, "original record carries policy/seed"));
      }
    } else if (fields[4] == "Augmented") {
      if (fields[5].empty()) fail(ErrorKind::Parse, at_line(line_no, "augmented record without policy"));
      record.meta.provenance = Provenance::augmented_by(
          fields[5], parse_number<std::uint64_t>(fields[6], line_no, "seed"));
    } else {
      fail(ErrorKind::Parse, at_line(line_no, "unknown provenance '" + fields[4] + "'"));
    }
    manifest.records.push_back(std::move(record));
  }

  if (!saw_magic) fail(ErrorKind::Parse, "manifest: missing '# rfaug-manifest v1' header");
  if (!saw_num_tx || !saw_rate || !saw_window) {
    fail(ErrorKind::Parse, "manifest: header must carry num_tx, sample_rate_hz and window_len");
  }
  if (!saw_columns) fail(ErrorKind::Parse, "manifest: missing column row");
  return manifest;
}

void format_manifest(const DatasetManifest& manifest, std::ostream& out) {
  out << "# " << kMagic << '\n';
  out << "# num_tx=" << manifest.header.num_transmitters << '\n';
  out << "# sample_rate_hz=" << format_double(manifest.header.sample_rate_hz) << '\n';
  out << "# window_len=" << manifest.header.window_len << '\n';
  out << "# format=" << manifest.header.format << '\n';
  out << kColumns << '\n';
  for (const auto& r : manifest.records) {
    const std::string path = r.path.generic_string();
    if (path.find_first_of(",\n") != std::string::npos) {
      fail(ErrorKind::Validation, "manifest path contains a comma or newline: " + path);
    }
    const auto& prov = r.meta.provenance;
    if (prov.policy.find_first_of(",\n") != std::string::npos) {
      fail(ErrorKind::Validation, "policy name contains a comma or newline: " + prov.policy);
    }
    out << path << ',' << to_string(r.meta.waveform) << ',' << r.meta.transmitter_id << ','
        << to_string(r.meta.day) << ',';
    if (prov.augmented) {
      out << "Augmented," << prov.policy << ',' << prov.seed << '\n';
    } else {
      out << "Original,,\n";
    }
  }
}

void validate_manifest_fields(const DatasetManifest& manifest) {
  const auto& h = manifest.header;
  if (h.num_transmitters < 1) fail(ErrorKind::Validation, "manifest: num_tx must be >= 1");
  if (!(h.sample_rate_hz > 0.0)) fail(ErrorKind::Validation, "manifest: sample_rate_hz must be > 0");
  if (h.window_len < 16) fail(ErrorKind::Validation, "manifest: window_len must be >= 16");
  if (h.format != kManifestFormat) {
    fail(ErrorKind::Validation, "manifest: unsupported format '" + h.format + "'");
  }
  for (const auto& r : manifest.records) {
    if (r.meta.transmitter_id < 0 || r.meta.transmitter_id >= h.num_transmitters) {
      fail(ErrorKind::Validation, "manifest: tx_id " + std::to_string(r.meta.transmitter_id) +
                                      " out of range for " + r.path.string());
    }
  }
}

std::filesystem::path resolve_record_path(const std::filesystem::path& manifest_dir,
                                          const std::filesystem::path& record_path) {
  return record_path.is_absolute() ? record_path : manifest_dir / record_path;
}

void validate_manifest_files(const DatasetManifest& manifest, const std::filesystem::path& base_dir) {
  validate_manifest_fields(manifest);
  for (const auto& r : manifest.records) {
    const auto full = resolve_record_path(base_dir, r.path);
    std::error_code ec;
    const auto size = std::filesystem::file_size(full, ec);
    if (ec) fail(ErrorKind::Validation, "manifest: dangling path " + full.string());
    if (size % 8 != 0) {
      fail(ErrorKind::Validation, "manifest: " + full.string() + " is not a whole number of I/Q records");
    }
  }
}

DatasetManifest read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::Io, "cannot open manifest " + path.string());
  DatasetManifest manifest = parse_manifest(in);
  validate_manifest_files(manifest, path.parent_path());
  return manifest;
}

void write_manifest(const DatasetManifest& manifest, const std::filesystem::path& path) {
  std::ostringstream text;
  format_manifest(manifest, text);
  std::ofstream out(path, std::ios::trunc);
  if (!out) fail(ErrorKind::Io, "cannot open " + path.string() + " for writing");
  out << text.str();
  if (!out) fail(ErrorKind::Io, "write error on " + path.string());
}

}  // namespace rfaug
