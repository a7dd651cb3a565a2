#include "rfaug/impairments.hpp"

#include <cmath>
#include <numbers>

#include "rfaug/config.hpp"
#include "rfaug/error.hpp"
#include "rfaug/random.hpp"

namespace rfaug {

namespace {

std::vector<Sample> copy_of(const IqBuffer& x) { return {x.samples().begin(), x.samples().end()}; }

bool finite(std::complex<double> z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

}  // namespace

void TransmitterFingerprint::validate() const {
  if (!(iq_gain > 0.0) || !std::isfinite(iq_gain)) fail(ErrorKind::Validation, "IQ gain must be > 0");
  if (!(std::abs(iq_phase_deg) < 90.0)) fail(ErrorKind::Validation, "IQ phase must satisfy |phi| < 90");
  if (!finite(dc_offset) || !finite(pa_a1) || !finite(pa_a3) || !finite(pa_a5) || !std::isfinite(cfo_hz) ||
      !(phase_noise_std >= 0.0) || !std::isfinite(phase_noise_std)) {
    fail(ErrorKind::Validation, "fingerprint coefficients must be finite");
  }
}

IqImbalanceCoefficients iq_imbalance_coefficients(double gain, double phase_deg) {
  const std::complex<double> g = std::polar(gain, phase_deg * std::numbers::pi / 180.0);
  return {(1.0 + g) / 2.0, (1.0 - g) / 2.0};
}

IqBuffer apply_iq_imbalance(const IqBuffer& x, double gain, double phase_deg) {
  if (!(gain > 0.0)) fail(ErrorKind::InvalidArgument, "IQ gain must be > 0");
  const auto [mu, nu] = iq_imbalance_coefficients(gain, phase_deg);
  auto y = copy_of(x);
  for (auto& s : y) s = mu * s + nu * std::conj(s);
  return IqBuffer(std::move(y), x.sample_rate_hz());
}

IqBuffer apply_dc_offset(const IqBuffer& x, std::complex<double> offset) {
  auto y = copy_of(x);
  for (auto& s : y) s += offset;
  return IqBuffer(std::move(y), x.sample_rate_hz());
}

IqBuffer apply_pa(const IqBuffer& x, std::complex<double> a1, std::complex<double> a3,
                  std::complex<double> a5) {
  auto y = copy_of(x);
  for (auto& s : y) {
    const double p = std::norm(s);
    s = s * (a1 + a3 * p + a5 * p * p);
  }
  return IqBuffer(std::move(y), x.sample_rate_hz());
}

IqBuffer apply_cfo_phase_noise(const IqBuffer& x, double cfo_hz, double phase_noise_std,
                               std::uint64_t seed) {
  if (!(phase_noise_std >= 0.0)) fail(ErrorKind::InvalidArgument, "phase noise std must be >= 0");
  auto y = copy_of(x);
  const double step = 2.0 * std::numbers::pi * cfo_hz / x.sample_rate_hz();
  Rng rng(seed);
  double walk = 0.0;
  for (std::size_t k = 0; k < y.size(); ++k) {
    if (k > 0 && phase_noise_std > 0.0) walk += phase_noise_std * rng.normal();
    const double phase = step * static_cast<double>(k) + walk;
    if (phase != 0.0) y[k] *= std::polar(1.0, phase);
  }
  return IqBuffer(std::move(y), x.sample_rate_hz());
}

IqBuffer apply_fingerprint(const IqBuffer& x, const TransmitterFingerprint& fp, std::uint64_t seed) {
  fp.validate();
  IqBuffer y = apply_dc_offset(x, fp.dc_offset);
  y = apply_iq_imbalance(y, fp.iq_gain, fp.iq_phase_deg);
  y = apply_pa(y, fp.pa_a1, fp.pa_a3, fp.pa_a5);
  return apply_cfo_phase_noise(y, fp.cfo_hz, fp.phase_noise_std, seed);
}

// Desk-scale synthesis knobs; keep in sync with config/fingerprints.ini.
FingerprintBank default_fingerprint_bank() {
  // Exaggerated relative to real hardware so the transmitter signature survives
  // the per-file channel draw at desk-scale training sizes.
  FingerprintBank bank;
  bank.version = 1;
  TransmitterFingerprint tx;

  tx = {};
  bank.transmitters.push_back(tx);

  tx = {};
  tx.iq_gain = 1.1;
  tx.iq_phase_deg = 5.0;
  tx.dc_offset = {0.2, 0.0};
  tx.cfo_hz = 300.0;
  bank.transmitters.push_back(tx);

  tx = {};
  tx.iq_gain = 0.9;
  tx.iq_phase_deg = -5.0;
  tx.dc_offset = {0.0, 0.4};
  tx.cfo_hz = -300.0;
  bank.transmitters.push_back(tx);

  tx = {};
  tx.iq_gain = 1.2;
  tx.iq_phase_deg = 10.0;
  tx.dc_offset = {-0.42, -0.42};
  tx.cfo_hz = 600.0;
  bank.transmitters.push_back(tx);

  return bank;
}

FingerprintBank load_fingerprint_bank(const std::filesystem::path& path) {
  const KvConfig cfg = KvConfig::load(path);
  FingerprintBank bank;
  bank.version = static_cast<int>(cfg.get_int("bank.version"));
  if (bank.version != 1) {
    fail(ErrorKind::Config, path.string() + ": unsupported bank version " + std::to_string(bank.version));
  }
  const auto count = cfg.get_int("bank.num_tx");
  if (count < 1) fail(ErrorKind::Config, path.string() + ": num_tx must be >= 1");
  for (std::int64_t t = 0; t < count; ++t) {
    const std::string s = "tx" + std::to_string(t) + ".";
    if (!cfg.has_section("tx" + std::to_string(t))) {
      fail(ErrorKind::Config, path.string() + ": missing section [tx" + std::to_string(t) + "]");
    }
    TransmitterFingerprint fp;
    fp.iq_gain = cfg.get_double(s + "iq_gain", fp.iq_gain);
    fp.iq_phase_deg = cfg.get_double(s + "iq_phase_deg", fp.iq_phase_deg);
    fp.dc_offset = cfg.get_complex(s + "dc_offset", fp.dc_offset);
    fp.pa_a1 = cfg.get_complex(s + "pa_a1", fp.pa_a1);
    fp.pa_a3 = cfg.get_complex(s + "pa_a3", fp.pa_a3);
    fp.pa_a5 = cfg.get_complex(s + "pa_a5", fp.pa_a5);
    fp.cfo_hz = cfg.get_double(s + "cfo_hz", fp.cfo_hz);
    fp.phase_noise_std = cfg.get_double(s + "phase_noise_std", fp.phase_noise_std);
    fp.validate();
    bank.transmitters.push_back(fp);
  }
  return bank;
}

void save_fingerprint_bank(const FingerprintBank& bank, const std::filesystem::path& path) {
  KvConfig cfg;
  cfg.set("bank.version", std::int64_t{bank.version});
  cfg.set("bank.num_tx", static_cast<std::int64_t>(bank.transmitters.size()));
  for (std::size_t t = 0; t < bank.transmitters.size(); ++t) {
    const auto& fp = bank.transmitters[t];
    const std::string s = "tx" + std::to_string(t) + ".";
    cfg.set(s + "iq_gain", fp.iq_gain);
    cfg.set(s + "iq_phase_deg", fp.iq_phase_deg);
    cfg.set(s + "dc_offset", fp.dc_offset);
    cfg.set(s + "pa_a1", fp.pa_a1);
    cfg.set(s + "pa_a3", fp.pa_a3);
    cfg.set(s + "pa_a5", fp.pa_a5);
    cfg.set(s + "cfo_hz", fp.cfo_hz);
    cfg.set(s + "phase_noise_std", fp.phase_noise_std);
  }
  cfg.save(path);
}

}  // namespace rfaug
