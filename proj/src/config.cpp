#include "rfaug/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>

#include "rfaug/error.hpp"

namespace rfaug {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

template <typename T>
T parse_as(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  T value{};
  const auto* end = t.data() + t.size();
  const auto [ptr, ec] = std::from_chars(t.data(), end, value);
  if (t.empty() || ec != std::errc() || ptr != end) {
    fail(ErrorKind::Config, "config key '" + key + "': cannot parse '" + text + "'");
  }
  return value;
}

// boost's INI reader has no comment stripping after values; drop trailing
// "; ..." or "# ..." and surrounding blanks.
std::string strip_comments(const std::string& text) {
  std::istringstream in(text);
  std::ostringstream out;
  std::string line;
  while (std::getline(in, line)) {
    const std::string t = trim(line);
    if (t.empty() || t.front() == ';' || t.front() == '#') {
      out << '\n';
      continue;
    }
    const auto cut = line.find_first_of(";#");
    out << trim(cut == std::string::npos ? line : line.substr(0, cut)) << '\n';
  }
  return out.str();
}

}  // namespace

std::string format_double(double value) {
  char buf[64];
  // Whole numbers such as sample rates print without an exponent.
  const bool whole = std::isfinite(value) && std::abs(value) < 1e15 && value == std::trunc(value);
  const auto [ptr, ec] = whole ? std::to_chars(buf, buf + sizeof(buf), value, std::chars_format::fixed)
                               : std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, ptr);
}

std::vector<std::string> split_list(std::string_view text) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto comma = text.find(',', start);
    const auto piece = trim(text.substr(start, comma == std::string_view::npos ? text.npos : comma - start));
    if (!piece.empty()) out.push_back(piece);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

KvConfig KvConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::Io, "cannot open config " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  try {
    return parse(text.str());
  } catch (const Error& e) {
    fail(e.kind(), path.string() + ": " + e.what());
  }
}

KvConfig KvConfig::parse(const std::string& text) {
  KvConfig cfg;
  std::istringstream in(strip_comments(text));
  try {
    boost::property_tree::ini_parser::read_ini(in, cfg.tree_);
  } catch (const boost::property_tree::ini_parser_error& e) {
    fail(ErrorKind::Parse, "config line " + std::to_string(e.line()) + ": " + e.message());
  }
  return cfg;
}

std::string KvConfig::to_string() const {
  std::ostringstream out;
  boost::property_tree::ini_parser::write_ini(out, tree_);
  return out.str();
}

void KvConfig::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::trunc);
  if (!out) fail(ErrorKind::Io, "cannot open " + path.string() + " for writing");
  out << to_string();
  if (!out) fail(ErrorKind::Io, "write error on " + path.string());
}

bool KvConfig::has(const std::string& key) const { return tree_.get_optional<std::string>(key).has_value(); }

bool KvConfig::has_section(const std::string& section) const {
  return tree_.get_child_optional(section).has_value();
}

std::string KvConfig::get_string(const std::string& key) const {
  const auto v = tree_.get_optional<std::string>(key);
  if (!v) fail(ErrorKind::Config, "missing config key '" + key + "'");
  return trim(*v);
}

std::string KvConfig::get_string(const std::string& key, const std::string& fallback) const {
  return has(key) ? get_string(key) : fallback;
}

double KvConfig::get_double(const std::string& key) const { return parse_as<double>(key, get_string(key)); }

double KvConfig::get_double(const std::string& key, double fallback) const {
  return has(key) ? get_double(key) : fallback;
}

std::int64_t KvConfig::get_int(const std::string& key) const {
  return parse_as<std::int64_t>(key, get_string(key));
}

std::int64_t KvConfig::get_int(const std::string& key, std::int64_t fallback) const {
  return has(key) ? get_int(key) : fallback;
}

std::uint64_t KvConfig::get_u64(const std::string& key, std::uint64_t fallback) const {
  return has(key) ? parse_as<std::uint64_t>(key, get_string(key)) : fallback;
}

std::complex<double> KvConfig::get_complex(const std::string& key, std::complex<double> fallback) const {
  if (!has(key)) return fallback;
  const auto parts = get_doubles(key);
  if (parts.size() != 2) fail(ErrorKind::Config, "config key '" + key + "': expected 're,im'");
  return {parts[0], parts[1]};
}

std::vector<std::string> KvConfig::get_strings(const std::string& key) const {
  return split_list(get_string(key));
}

std::vector<double> KvConfig::get_doubles(const std::string& key) const {
  std::vector<double> out;
  for (const auto& s : get_strings(key)) out.push_back(parse_as<double>(key, s));
  return out;
}

std::vector<std::uint64_t> KvConfig::get_u64s(const std::string& key) const {
  std::vector<std::uint64_t> out;
  for (const auto& s : get_strings(key)) out.push_back(parse_as<std::uint64_t>(key, s));
  return out;
}

std::pair<double, double> KvConfig::get_range(const std::string& key) const {
  const auto v = get_doubles(key);
  if (v.size() != 2) fail(ErrorKind::Config, "config key '" + key + "': expected 'min,max'");
  if (!(v[0] <= v[1])) fail(ErrorKind::Config, "config key '" + key + "': min exceeds max");
  return {v[0], v[1]};
}

void KvConfig::set(const std::string& key, const std::string& value) { tree_.put(key, value); }
void KvConfig::set(const std::string& key, double value) { tree_.put(key, format_double(value)); }
void KvConfig::set(const std::string& key, std::int64_t value) { tree_.put(key, std::to_string(value)); }
void KvConfig::set(const std::string& key, std::complex<double> value) {
  tree_.put(key, format_double(value.real()) + "," + format_double(value.imag()));
}

}  // namespace rfaug
