#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace rfaug {

using Sample = std::complex<double>;

/// Contiguous complex baseband samples plus their sample rate. Immutable after
/// construction: the sample rate is positive and every sample is finite.
class IqBuffer {
 public:
  IqBuffer(std::vector<Sample> samples, double sample_rate_hz);

  std::span<const Sample> samples() const noexcept { return samples_; }
  std::size_t size() const noexcept { return samples_.size(); }
  bool empty() const noexcept { return samples_.empty(); }
  double sample_rate_hz() const noexcept { return sample_rate_hz_; }
  const Sample& operator[](std::size_t k) const { return samples_[k]; }

  std::vector<Sample> release() && { return std::move(samples_); }

  friend bool operator==(const IqBuffer&, const IqBuffer&) = default;

 private:
  std::vector<Sample> samples_;
  double sample_rate_hz_;
};

enum class WaveformKind { FiveG, Wifi, Lte };
enum class Day { Day1, Day2 };

inline constexpr WaveformKind kAllWaveforms[] = {WaveformKind::FiveG, WaveformKind::Wifi,
                                                 WaveformKind::Lte};

std::string_view to_string(WaveformKind kind);
std::string_view to_string(Day day);
WaveformKind parse_waveform(std::string_view text);
Day parse_day(std::string_view text);

struct Provenance {
  bool augmented = false;
  std::string policy;  // empty for originals
  std::uint64_t seed = 0;

  static Provenance original() { return {}; }
  static Provenance augmented_by(std::string policy, std::uint64_t seed) {
    return {true, std::move(policy), seed};
  }

  friend bool operator==(const Provenance&, const Provenance&) = default;
};

struct RecordingMeta {
  WaveformKind waveform = WaveformKind::FiveG;
  int transmitter_id = 0;
  Day day = Day::Day1;
  Provenance provenance;

  friend bool operator==(const RecordingMeta&, const RecordingMeta&) = default;
};

/// One fixed-length training window cut from a recording.
struct Example {
  std::vector<Sample> window;
  int label = 0;
  RecordingMeta meta;
};

/// Reads interleaved little-endian float32 I,Q pairs (no header).
IqBuffer read_iq_bin(const std::filesystem::path& path, double sample_rate_hz);

/// Inverse of read_iq_bin. Samples are narrowed to float32.
void write_iq_bin(const IqBuffer& buffer, const std::filesystem::path& path);

/// Windows i = 0, 1, ... cover samples [i*stride, i*stride + window_len).
/// A buffer shorter than one window yields no examples.
std::vector<Example> slice_examples(const IqBuffer& buffer, const RecordingMeta& meta,
                                   std::size_t window_len, std::size_t stride);

double mean_power(std::span<const Sample> samples);

/// y = x / sqrt(mean |x|^2). Throws a Degenerate error on zero power.
IqBuffer normalize_power(const IqBuffer& buffer);
std::vector<Sample> normalize_power(std::span<const Sample> samples);

}  // namespace rfaug
