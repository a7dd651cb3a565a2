#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <numeric>

#include "rfaug/channel.hpp"
#include "rfaug/error.hpp"
#include "rfaug/random.hpp"

namespace rfaug {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr std::uint64_t kHeadingStream = 0x48454144494E47ULL;
constexpr std::uint64_t kNoiseStream = 0x4E4F495345ULL;
// The phasor recursion is re-anchored to exact values at this interval.
constexpr std::size_t kResyncInterval = 1024;

double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

// Sum of equal-amplitude complex sinusoids, 1/sqrt(M) scaled.
std::vector<std::complex<double>> sum_of_sinusoids(std::span<const double> doppler_hz,
                                                   std::span<const double> phases, double fs,
                                                   std::size_t num_samples) {
  const std::size_t m_count = doppler_hz.size();
  std::vector<double> re(m_count), im(m_count), rot_re(m_count), rot_im(m_count);
  for (std::size_t m = 0; m < m_count; ++m) {
    const double w = kTwoPi * doppler_hz[m] / fs;
    rot_re[m] = std::cos(w);
    rot_im[m] = std::sin(w);
  }
  const double scale = 1.0 / std::sqrt(static_cast<double>(m_count));

  std::vector<std::complex<double>> out(num_samples);
  for (std::size_t k = 0; k < num_samples; ++k) {
    if (k % kResyncInterval == 0) {
      for (std::size_t m = 0; m < m_count; ++m) {
        const double arg = kTwoPi * doppler_hz[m] * static_cast<double>(k) / fs + phases[m];
        re[m] = std::cos(arg);
        im[m] = std::sin(arg);
      }
    }
    double acc_re = 0.0;
    double acc_im = 0.0;
    for (std::size_t m = 0; m < m_count; ++m) {
      acc_re += re[m];
      acc_im += im[m];
      const double nr = re[m] * rot_re[m] - im[m] * rot_im[m];
      const double ni = re[m] * rot_im[m] + im[m] * rot_re[m];
      re[m] = nr;
      im[m] = ni;
    }
    out[k] = {acc_re * scale, acc_im * scale};
  }
  return out;
}

void scale_to_unit_power(std::vector<std::complex<double>>& v) {
  double acc = 0.0;
  for (const auto& z : v) acc += std::norm(z);
  if (acc <= 0.0) return;
  const double s = 1.0 / std::sqrt(acc / static_cast<double>(v.size()));
  for (auto& z : v) z *= s;
}

std::vector<std::complex<double>> tone(double doppler_hz, double phase, double amplitude, double fs,
                                       std::size_t num_samples) {
  const std::array<double, 1> f{doppler_hz};
  const std::array<double, 1> p{phase};
  auto out = sum_of_sinusoids(f, p, fs, num_samples);
  for (auto& z : out) z *= amplitude;
  return out;
}

void split_rician(FadingRealization& r, double k_db, double los_doppler_hz, double los_phase,
                  double fs, std::size_t num_samples) {
  const double k = db_to_linear(k_db);
  const double los_amp = std::sqrt(k / (k + 1.0));
  const double diffuse_amp = std::sqrt(1.0 / (k + 1.0));
  for (auto& z : r.diffuse) z *= diffuse_amp;
  r.los = tone(los_doppler_hz, los_phase, los_amp, fs, num_samples);
}

void finish(FadingRealization& r) {
  r.gain.resize(r.diffuse.size());
  for (std::size_t k = 0; k < r.gain.size(); ++k) {
    r.gain[k] = r.diffuse[k] + (r.los.empty() ? std::complex<double>{} : r.los[k]);
  }
}

void check_tap(std::size_t tap_index, const TapProfile& profile) {
  if (tap_index >= profile.size()) {
    fail(ErrorKind::InvalidArgument, "tap index " + std::to_string(tap_index) + " out of range");
  }
}

std::vector<std::complex<double>> delayed(std::span<const Sample> x, double delay_samples) {
  const std::size_t n = x.size();
  std::vector<std::complex<double>> out(n);
  const double whole = std::floor(delay_samples);
  const double frac = delay_samples - whole;
  const auto shift = static_cast<std::ptrdiff_t>(whole);

  if (frac < 1e-12) {
    for (std::size_t k = static_cast<std::size_t>(shift); k < n; ++k) {
      out[k] = x[k - static_cast<std::size_t>(shift)];
    }
    return out;
  }

  const auto h = fractional_delay_taps(frac);
  constexpr auto center = static_cast<std::ptrdiff_t>(kFracDelayTaps / 2);
  const auto len = static_cast<std::ptrdiff_t>(n);
  for (std::ptrdiff_t k = 0; k < len; ++k) {
    // out[k] = sum_j h[j] * x[k - shift - j + center]
    const std::ptrdiff_t base = k - shift + center;
    const std::ptrdiff_t j_lo = std::max<std::ptrdiff_t>(0, base - (len - 1));
    const std::ptrdiff_t j_hi = std::min<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(kFracDelayTaps) - 1, base);
    double acc_re = 0.0;
    double acc_im = 0.0;
    for (std::ptrdiff_t j = j_lo; j <= j_hi; ++j) {
      const auto& s = x[static_cast<std::size_t>(base - j)];
      acc_re += h[static_cast<std::size_t>(j)] * s.real();
      acc_im += h[static_cast<std::size_t>(j)] * s.imag();
    }
    out[static_cast<std::size_t>(k)] = {acc_re, acc_im};
  }
  return out;
}

template <typename Profile>
IqBuffer apply_impl(const IqBuffer& x, const Profile& profile, const TapProfile& taps,
                    const ChannelConfig& config) {
  config.validate();
  profile.validate();
  if (x.sample_rate_hz() != config.sample_rate_hz) {
    fail(ErrorKind::Config, "buffer sample rate " + std::to_string(x.sample_rate_hz()) +
                                " Hz does not match channel config " +
                                std::to_string(config.sample_rate_hz) + " Hz");
  }
  if (taps.unit != DelayUnit::Seconds) {
    fail(ErrorKind::Config, taps.name + ": delays are normalized; call scale_delays first");
  }
  const double fs = config.sample_rate_hz;
  const std::size_t n = x.size();
  const double duration = static_cast<double>(n) / fs;
  if (n > 0 && taps.delays.back() >= duration) {
    fail(ErrorKind::Config, taps.name + ": maximum delay exceeds the buffer duration");
  }
  if (n == 0) return x;

  std::vector<double> powers(taps.size());
  for (std::size_t t = 0; t < taps.size(); ++t) powers[t] = db_to_linear(taps.powers_db[t]);
  const double total = std::accumulate(powers.begin(), powers.end(), 0.0);
  for (auto& p : powers) p /= total;

  std::vector<std::vector<std::complex<double>>> gains;
  gains.reserve(taps.size());
  for (std::size_t t = 0; t < taps.size(); ++t) {
    gains.push_back(gen_fading(t, profile, config, n).gain);
  }

  // Phase reference on the strongest tap, as a phase-locked receiver would see it.
  const auto strongest = static_cast<std::size_t>(
      std::distance(powers.begin(), std::max_element(powers.begin(), powers.end())));
  const auto g0 = gains[strongest].front();
  const std::complex<double> ref = std::abs(g0) > 0.0 ? std::conj(g0) / std::abs(g0) : 1.0;

  std::vector<Sample> y(n);
  for (std::size_t t = 0; t < taps.size(); ++t) {
    const auto xd = delayed(x.samples(), taps.delays[t] * fs);
    const std::complex<double> w = std::sqrt(powers[t]) * ref;
    const auto& g = gains[t];
    for (std::size_t k = 0; k < n; ++k) y[k] += w * g[k] * xd[k];
  }
  return IqBuffer(std::move(y), fs);
}

}  // namespace

void ChannelConfig::validate() const {
  if (!(sample_rate_hz > 0.0) || !std::isfinite(sample_rate_hz)) {
    fail(ErrorKind::Config, "channel sample rate must be positive");
  }
  if (!(delay_spread_s >= 0.0) || !std::isfinite(delay_spread_s)) {
    fail(ErrorKind::Config, "delay spread must be finite and >= 0");
  }
  if (!(max_doppler_hz >= 0.0) || !(max_doppler_hz < sample_rate_hz / 2.0)) {
    fail(ErrorKind::Config, "max Doppler must lie in [0, fs/2)");
  }
  if (snr_db && !std::isfinite(*snr_db)) fail(ErrorKind::Config, "SNR must be finite");
}

double travel_heading_deg(std::uint64_t seed) {
  Rng rng(mix_seed(seed, kHeadingStream));
  return rng.uniform(-180.0, 180.0);
}

FadingRealization gen_fading(std::size_t tap_index, const TapProfile& profile,
                             const ChannelConfig& config, std::size_t num_samples) {
  check_tap(tap_index, profile);
  const double fs = config.sample_rate_hz;
  const double fd = config.max_doppler_hz;
  Rng rng(mix_seed(config.seed, tap_index));

  FadingRealization r;
  r.num_sinusoids = kNumSinusoids;
  r.phases.resize(kNumSinusoids);
  r.doppler_hz.resize(kNumSinusoids);
  // Arrival angles equally spaced around the circle with a random rotation;
  // the ensemble autocorrelation is then J0(2 pi fd tau).
  const double rotation = rng.uniform(0.0, kTwoPi);
  for (int m = 0; m < kNumSinusoids; ++m) {
    const double angle = (kTwoPi * m + rotation) / kNumSinusoids;
    r.doppler_hz[m] = fd * std::cos(angle);
    r.phases[m] = rng.uniform(0.0, kTwoPi);
  }
  r.diffuse = sum_of_sinusoids(r.doppler_hz, r.phases, fs, num_samples);
  scale_to_unit_power(r.diffuse);

  if (profile.los && tap_index == 0) {
    const double los_angle = rng.uniform(0.0, kTwoPi);
    const double los_phase = rng.uniform(0.0, kTwoPi);
    split_rician(r, *profile.rician_k_db, fd * std::cos(los_angle), los_phase, fs, num_samples);
  }
  finish(r);
  return r;
}

FadingRealization gen_fading(std::size_t tap_index, const ClusterProfile& profile,
                             const ChannelConfig& config, std::size_t num_samples) {
  check_tap(tap_index, profile.taps);
  const double fs = config.sample_rate_hz;
  const double heading = travel_heading_deg(config.seed);
  const double shift = config.max_doppler_hz *
                       std::cos((profile.aoa_deg.at(tap_index) - heading) * std::numbers::pi / 180.0);
  Rng rng(mix_seed(config.seed, tap_index));

  FadingRealization r;
  r.num_sinusoids = 1;
  r.phases = {rng.uniform(0.0, kTwoPi)};
  r.doppler_hz = {shift};
  r.diffuse = tone(shift, r.phases[0], 1.0, fs, num_samples);
  if (profile.taps.los && tap_index == 0) {
    split_rician(r, *profile.taps.rician_k_db, shift, rng.uniform(0.0, kTwoPi), fs, num_samples);
  }
  finish(r);
  return r;
}

std::vector<double> fractional_delay_taps(double frac) {
  if (!(frac >= 0.0 && frac < 1.0)) {
    fail(ErrorKind::InvalidArgument, "fractional delay must lie in [0, 1)");
  }
  constexpr double center = static_cast<double>(kFracDelayTaps / 2);
  constexpr double half_width = static_cast<double>(kFracDelayTaps + 1) / 2.0;
  std::vector<double> h(kFracDelayTaps);
  double sum = 0.0;
  for (std::size_t j = 0; j < kFracDelayTaps; ++j) {
    const double t = static_cast<double>(j) - center - frac;
    const double sinc = t == 0.0 ? 1.0 : std::sin(std::numbers::pi * t) / (std::numbers::pi * t);
    const double window = 0.5 * (1.0 + std::cos(std::numbers::pi * t / half_width));
    h[j] = sinc * window;
    sum += h[j];
  }
  for (auto& v : h) v /= sum;
  return h;
}

IqBuffer apply_channel(const IqBuffer& x, const TapProfile& profile, const ChannelConfig& config) {
  return apply_impl(x, profile, profile, config);
}

IqBuffer apply_channel(const IqBuffer& x, const ClusterProfile& profile, const ChannelConfig& config) {
  return apply_impl(x, profile, profile.taps, config);
}

IqBuffer add_awgn(const IqBuffer& x, double snr_db, std::uint64_t seed) {
  if (x.empty()) fail(ErrorKind::Degenerate, "cannot add AWGN to an empty buffer");
  if (!std::isfinite(snr_db)) fail(ErrorKind::InvalidArgument, "SNR must be finite");
  const double power = mean_power(x.samples());
  if (!(power > 0.0)) fail(ErrorKind::Degenerate, "cannot set SNR on a zero-power buffer");

  const double variance = power / std::pow(10.0, snr_db / 10.0);
  Rng rng(seed);
  std::vector<Sample> y(x.samples().begin(), x.samples().end());
  for (auto& s : y) s += rng.complex_normal(variance);
  return IqBuffer(std::move(y), x.sample_rate_hz());
}

IqBuffer apply_channel_draw(const IqBuffer& x, ChannelFamily family, ProfileId id,
                            const ChannelConfig& config) {
  IqBuffer faded = family == ChannelFamily::Tdl
                       ? apply_channel(x, scale_delays(tdl_profile(id), config.delay_spread_s), config)
                       : apply_channel(x, scale_delays(cdl_profile(id), config.delay_spread_s), config);
  if (!config.snr_db) return faded;
  return add_awgn(faded, *config.snr_db, mix_seed(config.seed, kNoiseStream));
}

}  // namespace rfaug
