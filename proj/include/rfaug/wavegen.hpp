#pragma once

#include <cstddef>
#include <cstdint>

#include "rfaug/iq.hpp"

namespace rfaug {

/// Simplified OFDM burst layout. Modulation is always QPSK.
struct WaveformSpec {
  WaveformKind kind = WaveformKind::FiveG;
  std::size_t fft_size = 512;
  std::size_t cp_len = 36;
  std::size_t occupied_subcarriers = 300;

  /// fft_size a power of two, 0 < cp_len < fft_size, occupied in [1, fft_size - 2].
  void validate() const;
  std::size_t symbol_len() const noexcept { return fft_size + cp_len; }
};

/// FiveG: 512/36/300, Wifi: 64/16/52, Lte: 512/40/300.
WaveformSpec default_spec(WaveformKind kind);

/// FFT bin indices (0..fft_size-1) carrying data: +1..+N/2 and -N/2..-1,
/// DC excluded. An odd count puts the extra carrier on the positive side.
std::vector<std::size_t> occupied_bins(const WaveformSpec& spec);

/// Seeded QPSK on the occupied carriers, inverse DFT, cyclic prefix, then the
/// whole burst scaled to unit mean power.
IqBuffer gen_burst(const WaveformSpec& spec, std::size_t num_symbols, std::uint64_t payload_seed,
                   double sample_rate_hz);

}  // namespace rfaug
