#pragma once

#include <complex>
#include <cstdint>
#include <random>

namespace rfaug {

/// SplitMix64 finalizer. Used to derive independent per-item seeds.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// seed_item = mix(master_seed, item_index). Results never depend on the
/// order in which items are processed.
constexpr std::uint64_t mix_seed(std::uint64_t master, std::uint64_t index) noexcept {
  return splitmix64(master ^ splitmix64(index + 0x632BE59BD9B4E019ULL));
}

// Distributions are written out by hand instead of using <random>'s
// distribution classes, whose output is implementation-defined. This keeps
// every draw bit-identical across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform index in [0, n). n must be nonzero.
  std::size_t below(std::size_t n) { return static_cast<std::size_t>(engine_() % n); }

  /// Standard normal via Box-Muller.
  double normal();

  /// Circular complex Gaussian with E|z|^2 = variance.
  std::complex<double> complex_normal(double variance);

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace rfaug
