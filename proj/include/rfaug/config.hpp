#pragma once

#include <complex>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <boost/property_tree/ptree.hpp>

namespace rfaug {

/// INI-style key/value configuration (`[section]` headers, `key = value`
/// lines, `;` or `#` comments). Keys are addressed as "section.key". Lists
/// are comma separated; complex values are written "re,im".
class KvConfig {
 public:
  KvConfig() = default;

  static KvConfig load(const std::filesystem::path& path);
  static KvConfig parse(const std::string& text);
  void save(const std::filesystem::path& path) const;
  std::string to_string() const;

  bool has(const std::string& key) const;
  bool has_section(const std::string& section) const;

  std::string get_string(const std::string& key) const;
  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key) const;
  double get_double(const std::string& key, double fallback) const;
  std::int64_t get_int(const std::string& key) const;
  std::int64_t get_int(const std::string& key, std::int64_t fallback) const;
  std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
  std::complex<double> get_complex(const std::string& key, std::complex<double> fallback) const;
  std::vector<double> get_doubles(const std::string& key) const;
  std::vector<std::string> get_strings(const std::string& key) const;
  std::vector<std::uint64_t> get_u64s(const std::string& key) const;

  /// (min, max) from a two-element list, checked min <= max.
  std::pair<double, double> get_range(const std::string& key) const;

  void set(const std::string& key, const std::string& value);
  void set(const std::string& key, double value);
  void set(const std::string& key, std::int64_t value);
  void set(const std::string& key, std::complex<double> value);

 private:
  boost::property_tree::ptree tree_;
};

std::string format_double(double value);
std::vector<std::string> split_list(std::string_view text);

}  // namespace rfaug
