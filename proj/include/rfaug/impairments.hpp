#pragma once

#include <complex>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "rfaug/iq.hpp"

namespace rfaug {

/// Per-transmitter hardware impairments. Default-constructed values are the
/// nominal (ideal) transmitter.
struct TransmitterFingerprint {
  double iq_gain = 1.0;       // g > 0
  double iq_phase_deg = 0.0;  // |phi| < 90
  std::complex<double> dc_offset{0.0, 0.0};
  std::complex<double> pa_a1{1.0, 0.0};
  std::complex<double> pa_a3{0.0, 0.0};
  std::complex<double> pa_a5{0.0, 0.0};
  double cfo_hz = 0.0;
  double phase_noise_std = 0.0;  // radians per sample

  void validate() const;
  friend bool operator==(const TransmitterFingerprint&, const TransmitterFingerprint&) = default;
};

/// Image coefficients of y = mu*x + nu*conj(x).
struct IqImbalanceCoefficients {
  std::complex<double> mu;
  std::complex<double> nu;
};
IqImbalanceCoefficients iq_imbalance_coefficients(double gain, double phase_deg);

IqBuffer apply_iq_imbalance(const IqBuffer& x, double gain, double phase_deg);
IqBuffer apply_dc_offset(const IqBuffer& x, std::complex<double> offset);
IqBuffer apply_pa(const IqBuffer& x, std::complex<double> a1, std::complex<double> a3,
                  std::complex<double> a5);
/// y[k] = x[k] * exp(j(2 pi cfo k / fs + theta[k])), theta a Gaussian random
/// walk with per-step std `phase_noise_std`.
IqBuffer apply_cfo_phase_noise(const IqBuffer& x, double cfo_hz, double phase_noise_std,
                               std::uint64_t seed);

/// Transmit-chain order: DC offset, IQ imbalance, PA, CFO/phase noise.
/// `seed` drives the phase-noise walk only.
IqBuffer apply_fingerprint(const IqBuffer& x, const TransmitterFingerprint& fp,
                           std::uint64_t seed = 0);

struct FingerprintBank {
  int version = 1;
  std::vector<TransmitterFingerprint> transmitters;
};

/// The four-transmitter bank shipped as config/fingerprints.ini.
FingerprintBank default_fingerprint_bank();
FingerprintBank load_fingerprint_bank(const std::filesystem::path& path);
void save_fingerprint_bank(const FingerprintBank& bank, const std::filesystem::path& path);

}  // namespace rfaug
