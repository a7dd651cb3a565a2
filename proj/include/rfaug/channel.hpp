#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rfaug/iq.hpp"

namespace rfaug {

enum class ProfileId { A, B, C, D, E };
enum class ChannelFamily { Tdl, Cdl };
enum class DelayUnit { Normalized, Seconds };

std::string_view to_string(ProfileId id);
ProfileId parse_profile_id(std::string_view text);  // "A".."E"
std::string_view to_string(ChannelFamily family);

/// Power-delay profile. For LOS profiles tap 0 carries the combined LOS plus
/// diffuse power and `rician_k_db` splits it.
struct TapProfile {
  std::string name;
  std::vector<double> delays;  // ascending, delays[0] == 0
  std::vector<double> powers_db;
  std::optional<double> rician_k_db;
  bool los = false;
  DelayUnit unit = DelayUnit::Normalized;

  std::size_t size() const noexcept { return delays.size(); }
  /// Throws Validation if an invariant does not hold.
  void validate() const;
};

/// Clustered profile: one composite ray per cluster with its arrival azimuth.
struct ClusterProfile {
  TapProfile taps;
  std::vector<double> aoa_deg;

  std::size_t size() const noexcept { return taps.size(); }
  void validate() const;
};

/// TDL-A..E power-delay profiles (3GPP TR 38.901, Tables 7.7.2-1..5),
/// sorted by delay.
TapProfile tdl_profile(ProfileId id);
/// CDL-A..E cluster profiles (3GPP TR 38.901, Tables 7.7.1-1..5), sorted by
/// delay; only the cluster azimuth of arrival is kept.
ClusterProfile cdl_profile(ProfileId id);

/// Power-weighted RMS delay spread, in the profile's delay unit.
double rms_delay_spread(const TapProfile& profile);

/// Rescales delays so the RMS delay spread equals `target_rms_ds_s` and
/// switches the unit to seconds. A zero target collapses every delay to 0.
TapProfile scale_delays(const TapProfile& profile, double target_rms_ds_s);
ClusterProfile scale_delays(const ClusterProfile& profile, double target_rms_ds_s);

struct ChannelConfig {
  double delay_spread_s = 100e-9;
  double max_doppler_hz = 0.0;
  double sample_rate_hz = 20e6;
  std::optional<double> snr_db;
  std::uint64_t seed = 0;

  void validate() const;
};

inline constexpr int kNumSinusoids = 64;
inline constexpr std::size_t kFracDelayTaps = 63;

/// Complex gain time series for one tap. `gain = los + diffuse`, with the
/// diffuse part holding unit mean square over the generated span (scaled by
/// 1/(K+1) on a Rician tap) so the total tap power is 1.
struct FadingRealization {
  std::vector<std::complex<double>> gain;
  std::vector<std::complex<double>> los;
  std::vector<std::complex<double>> diffuse;
  int num_sinusoids = 0;
  std::vector<double> phases;  // per-sinusoid initial phases, radians
  std::vector<double> doppler_hz;  // per-sinusoid Doppler shifts
};

/// Sum-of-sinusoids Rayleigh (or Rician on LOS tap 0) fading for a TDL tap.
FadingRealization gen_fading(std::size_t tap_index, const TapProfile& profile,
                             const ChannelConfig& config, std::size_t num_samples);
/// Single composite ray for a CDL cluster, Doppler f_d*cos(AoA - heading).
FadingRealization gen_fading(std::size_t tap_index, const ClusterProfile& profile,
                             const ChannelConfig& config, std::size_t num_samples);

/// Direction of travel used to map cluster azimuths onto Doppler shifts.
double travel_heading_deg(std::uint64_t seed);

/// 63-tap Hann-windowed sinc that delays by `frac` in [0, 1) samples about
/// its centre tap. Unit DC gain.
std::vector<double> fractional_delay_taps(double frac);

/// y[k] = sum_n g_n[k] * x(k - tau_n). Profile delays must be in seconds.
/// Gains are referenced so the strongest tap starts with zero phase.
IqBuffer apply_channel(const IqBuffer& x, const TapProfile& profile, const ChannelConfig& config);
IqBuffer apply_channel(const IqBuffer& x, const ClusterProfile& profile, const ChannelConfig& config);

/// Circular complex Gaussian noise at mean(|x|^2) / 10^(snr_db/10).
IqBuffer add_awgn(const IqBuffer& x, double snr_db, std::uint64_t seed);

/// Full draw: look up the profile, scale to config.delay_spread_s, fade,
/// then add AWGN if config.snr_db is set.
IqBuffer apply_channel_draw(const IqBuffer& x, ChannelFamily family, ProfileId id,
                            const ChannelConfig& config);

}  // namespace rfaug
