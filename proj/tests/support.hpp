#pragma once

#include <complex>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <random>
#include <string>
#include <vector>

#include <doctest.h>

#include "rfaug/error.hpp"

namespace testing {

// Scratch directory removed on scope exit.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("rfaug_" + tag + "_" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline std::vector<char> read_bytes(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_bytes(const std::filesystem::path& p, const std::vector<char>& bytes) {
  std::ofstream out(p, std::ios::binary);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

inline std::string read_text(const std::filesystem::path& p) {
  const auto b = read_bytes(p);
  return {b.begin(), b.end()};
}

inline std::vector<std::complex<double>> gaussian_samples(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> nd(0.0, 1.0 / std::sqrt(2.0));
  std::vector<std::complex<double>> v(n);
  for (auto& z : v) z = {nd(gen), nd(gen)};
  return v;
}

// Kind of the rfaug::Error thrown by fn; fails the test if nothing is thrown.
template <typename Fn>
rfaug::ErrorKind error_kind(Fn&& fn) {
  try {
    fn();
  } catch (const rfaug::Error& e) {
    return e.kind();
  }
  FAIL("expected an rfaug::Error");
  return rfaug::ErrorKind::Io;
}

}  // namespace testing
