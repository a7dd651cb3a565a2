#include "rfaug/iq.hpp"

#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

#include "rfaug/error.hpp"

namespace rfaug {

namespace {

constexpr std::size_t kRecordBytes = 2 * sizeof(float);

float load_f32le(const unsigned char* p) {
  const std::uint32_t bits = static_cast<std::uint32_t>(p[0]) |
                             (static_cast<std::uint32_t>(p[1]) << 8) |
                             (static_cast<std::uint32_t>(p[2]) << 16) |
                             (static_cast<std::uint32_t>(p[3]) << 24);
  return std::bit_cast<float>(bits);
}

void store_f32le(float value, unsigned char* p) {
  const auto bits = std::bit_cast<std::uint32_t>(value);
  p[0] = static_cast<unsigned char>(bits);
  p[1] = static_cast<unsigned char>(bits >> 8);
  p[2] = static_cast<unsigned char>(bits >> 16);
  p[3] = static_cast<unsigned char>(bits >> 24);
}

}  // namespace

IqBuffer::IqBuffer(std::vector<Sample> samples, double sample_rate_hz)
    : samples_(std::move(samples)), sample_rate_hz_(sample_rate_hz) {
  if (!(sample_rate_hz_ > 0.0) || !std::isfinite(sample_rate_hz_)) {
    fail(ErrorKind::InvalidArgument, "sample rate must be positive and finite");
  }
  for (std::size_t k = 0; k < samples_.size(); ++k) {
    if (!std::isfinite(samples_[k].real()) || !std::isfinite(samples_[k].imag())) {
      fail(ErrorKind::Validation, "non-finite sample at index " + std::to_string(k));
    }
  }
}

std::string_view to_string(WaveformKind kind) {
  switch (kind) {
    case WaveformKind::FiveG: return "FiveG";
    case WaveformKind::Wifi: return "Wifi";
    case WaveformKind::Lte: return "Lte";
  }
  return "?";
}

std::string_view to_string(Day day) { return day == Day::Day1 ? "Day1" : "Day2"; }

WaveformKind parse_waveform(std::string_view text) {
  if (text == "FiveG") return WaveformKind::FiveG;
  if (text == "Wifi") return WaveformKind::Wifi;
  if (text == "Lte") return WaveformKind::Lte;
  fail(ErrorKind::Parse, "unknown waveform kind '" + std::string(text) + "'");
}

Day parse_day(std::string_view text) {
  if (text == "Day1") return Day::Day1;
  if (text == "Day2") return Day::Day2;
  fail(ErrorKind::Parse, "unknown day '" + std::string(text) + "'");
}

IqBuffer read_iq_bin(const std::filesystem::path& path, double sample_rate_hz) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::Io, "cannot open " + path.string());

  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  if (in.bad()) fail(ErrorKind::Io, "read error on " + path.string());

  const std::size_t remainder = bytes.size() % kRecordBytes;
  if (remainder != 0) {
    fail(ErrorKind::Format, path.string() + ": truncated I/Q record at byte offset " +
                                std::to_string(bytes.size() - remainder));
  }

  std::vector<Sample> samples(bytes.size() / kRecordBytes);
  for (std::size_t k = 0; k < samples.size(); ++k) {
    const unsigned char* rec = bytes.data() + k * kRecordBytes;
    samples[k] = {load_f32le(rec), load_f32le(rec + 4)};
  }
  return IqBuffer(std::move(samples), sample_rate_hz);
}

void write_iq_bin(const IqBuffer& buffer, const std::filesystem::path& path) {
  std::vector<unsigned char> bytes(buffer.size() * kRecordBytes);
  for (std::size_t k = 0; k < buffer.size(); ++k) {
    unsigned char* rec = bytes.data() + k * kRecordBytes;
    store_f32le(static_cast<float>(buffer[k].real()), rec);
    store_f32le(static_cast<float>(buffer[k].imag()), rec + 4);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorKind::Io, "cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) fail(ErrorKind::Io, "write error on " + path.string());
}

std::vector<Example> slice_examples(const IqBuffer& buffer, const RecordingMeta& meta,
                                   std::size_t window_len, std::size_t stride) {
  if (window_len < 16) fail(ErrorKind::InvalidArgument, "window length must be >= 16");
  if (stride < 1) fail(ErrorKind::InvalidArgument, "stride must be >= 1");

  std::vector<Example> out;
  const std::size_t len = buffer.size();
  if (len < window_len) return out;

  const std::size_t count = (len - window_len) / stride + 1;
  out.reserve(count);
  const auto samples = buffer.samples();
  for (std::size_t i = 0; i < count; ++i) {
    const auto first = samples.begin() + static_cast<std::ptrdiff_t>(i * stride);
    out.push_back(Example{std::vector<Sample>(first, first + static_cast<std::ptrdiff_t>(window_len)),
                          meta.transmitter_id, meta});
  }
  return out;
}

double mean_power(std::span<const Sample> samples) {
  if (samples.empty()) return 0.0;
  double acc = 0.0;
  for (const auto& s : samples) acc += std::norm(s);
  return acc / static_cast<double>(samples.size());
}

std::vector<Sample> normalize_power(std::span<const Sample> samples) {
  if (samples.empty()) fail(ErrorKind::Degenerate, "cannot normalize an empty buffer");
  const double power = mean_power(samples);
  if (!(power > 0.0)) fail(ErrorKind::Degenerate, "cannot normalize a zero-power buffer");
  const double scale = 1.0 / std::sqrt(power);
  std::vector<Sample> out(samples.begin(), samples.end());
  for (auto& s : out) s *= scale;
  return out;
}

IqBuffer normalize_power(const IqBuffer& buffer) {
  return IqBuffer(normalize_power(buffer.samples()), buffer.sample_rate_hz());
}

}  // namespace rfaug
