// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any FAIL.
// Usage: rfaug_acceptance [--skip-experiment]
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "rfaug/augment.hpp"
#include "rfaug/channel.hpp"
#include "rfaug/classifier.hpp"
#include "rfaug/experiment.hpp"
#include "rfaug/iq.hpp"
#include "rfaug/manifest.hpp"

using namespace rfaug;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass;
  std::string detail;
};

int g_failures = 0;

void criterion(const std::string& name, const std::function<Outcome()>& body) {
  const auto t0 = Clock::now();
  Outcome r;
  try {
    r = body();
  } catch (const std::exception& e) {
    r = {false, std::string("exception: ") + e.what()};
  }
  const double s = std::chrono::duration<double>(Clock::now() - t0).count();
  if (!r.pass) ++g_failures;
  std::printf("%s  %-26s %s [%.2f s]\n", r.pass ? "PASS" : "FAIL", name.c_str(), r.detail.c_str(), s);
  std::fflush(stdout);
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

double bessel_j0(double x) {
  double term = 1.0, sum = 1.0;
  for (int m = 1; m < 80; ++m) {
    term *= -(x * x / 4.0) / (static_cast<double>(m) * m);
    sum += term;
  }
  return sum;
}

double ds_oracle(const TapProfile& p) {
  double sp = 0, s1 = 0, s2 = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double w = std::pow(10.0, p.powers_db[i] / 10.0);
    sp += w;
    s1 += w * p.delays[i];
    s2 += w * p.delays[i] * p.delays[i];
  }
  const double m = s1 / sp;
  return std::sqrt(std::max(0.0, s2 / sp - m * m));
}

TapProfile single_tap() {
  TapProfile p;
  p.name = "single";
  p.delays = {0.0};
  p.powers_db = {0.0};
  p.unit = DelayUnit::Seconds;
  return p;
}

IqBuffer white(std::size_t n, double fs, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> nd(0.0, std::sqrt(0.5));
  std::vector<Sample> v(n);
  for (auto& z : v) z = {nd(gen), nd(gen)};
  return IqBuffer(std::move(v), fs);
}

std::vector<char> bytes_of(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

constexpr ProfileId kIds[] = {ProfileId::A, ProfileId::B, ProfileId::C, ProfileId::D, ProfileId::E};

Outcome channel_identity() {
  const auto x = white(100000, 20e6, 1);
  ChannelConfig cfg;
  cfg.seed = 5;
  const auto y = apply_channel(x, single_tap(), cfg);
  double worst = 0;
  for (std::size_t k = 0; k < x.size(); ++k) worst = std::max(worst, std::abs(y[k] - x[k]));
  return {worst < 1e-6 && y.size() == x.size(), fmt("max |y-x| = %.3g (< 1e-6)", worst)};
}

Outcome delay_spread_scaling() {
  double worst = 0;
  for (const auto id : kIds) {
    for (const double target : {30e-9, 100e-9, 300e-9, 1000e-9}) {
      worst = std::max(worst, std::abs(ds_oracle(scale_delays(tdl_profile(id), target)) - target) / target);
      worst = std::max(worst, std::abs(ds_oracle(scale_delays(cdl_profile(id), target).taps) - target) / target);
    }
  }
  return {worst < 1e-9, fmt("40 cases, max rel err = %.3g (< 1e-9)", worst)};
}

// Single realizations over 5 Doppler periods scatter by ~0.3-0.6 around J0,
// so the ACF is averaged over an ensemble of independent draws.
Outcome doppler_statistics() {
  const double fd = 50.0, fs = 1e6;
  const std::size_t n = 100000;
  const int runs = 200;
  const std::size_t step = 250;
  const std::size_t max_lag = static_cast<std::size_t>(0.5 / fd * fs);
  const std::size_t lags = max_lag / step + 1;
  std::vector<double> acc(lags, 0.0);
  const auto p = single_tap();
  for (int r = 0; r < runs; ++r) {
    ChannelConfig cfg;
    cfg.max_doppler_hz = fd;
    cfg.sample_rate_hz = fs;
    cfg.seed = 1000 + static_cast<std::uint64_t>(r);
    const auto g = gen_fading(0, p, cfg, n).diffuse;
    for (std::size_t i = 0; i < lags; ++i) {
      const std::size_t lag = i * step;
      double s = 0;
      for (std::size_t k = 0; k + lag < n; ++k) s += (g[k + lag] * std::conj(g[k])).real();
      acc[i] += s / static_cast<double>(n - lag);
    }
  }
  double worst = 0;
  for (std::size_t i = 0; i < lags; ++i) {
    const double tau = static_cast<double>(i * step) / fs;
    worst = std::max(worst, std::abs(acc[i] / runs - bessel_j0(2 * std::numbers::pi * fd * tau)));
  }
  return {worst < 0.05, fmt("%d realizations x 1e5 samples, max |R - J0| = %.4f (< 0.05)", runs, worst)};
}

Outcome rician_split() {
  auto p = single_tap();
  p.los = true;
  p.rician_k_db = 13.0;
  ChannelConfig cfg;
  cfg.max_doppler_hz = 50.0;
  cfg.sample_rate_hz = 1e6;
  cfg.seed = 21;
  const auto r = gen_fading(0, p, cfg, 100000);
  double los = 0, diffuse = 0;
  for (std::size_t k = 0; k < r.gain.size(); ++k) {
    los += std::norm(r.los[k]);
    diffuse += std::norm(r.diffuse[k]);
  }
  const double k_db = 10 * std::log10(los / diffuse);
  return {std::abs(k_db - 13.0) <= 0.2, fmt("measured K = %.3f dB (13 +/- 0.2)", k_db)};
}

Outcome awgn_calibration() {
  const auto x = normalize_power(white(100000, 1e6, 3));
  double worst = 0;
  std::string detail;
  for (const double snr : {0.0, 10.0, 20.0}) {
    const auto y = add_awgn(x, snr, 40 + static_cast<std::uint64_t>(snr));
    double noise = 0;
    for (std::size_t k = 0; k < x.size(); ++k) noise += std::norm(y[k] - x[k]);
    const double measured = 10 * std::log10(static_cast<double>(x.size()) / noise);
    worst = std::max(worst, std::abs(measured - snr));
    detail += fmt("%g->%.3f ", snr, measured);
  }
  return {worst <= 0.1, detail + fmt("dB, max dev %.3f (<= 0.1)", worst)};
}

Outcome routing_matrix() {
  using P = AugmentationPolicy;
  using T = Transform;
  const T expected[6][3] = {
      {T::Passthrough, T::Passthrough, T::Passthrough}, {T::Tdl, T::Tdl, T::Tdl},
      {T::Cdl, T::Cdl, T::Cdl},                         {T::Cdl, T::Passthrough, T::Passthrough},
      {T::Passthrough, T::Tdl, T::Passthrough},         {T::Cdl, T::Tdl, T::Passthrough},
  };
  int mismatches = 0;
  for (std::size_t p = 0; p < 6; ++p) {
    for (std::size_t k = 0; k < 3; ++k) mismatches += select_transform(kAllPolicies[p], kAllWaveforms[k]) != expected[p][k];
  }
  const bool lte = select_transform(P::DecoupledCdlTdl, WaveformKind::Lte) == T::Passthrough;
  return {mismatches == 0 && lte, fmt("18 cells, %d mismatches; (DecoupledCdlTdl, Lte) -> %s", mismatches,
                                      lte ? "Passthrough" : "augmented")};
}

Outcome gradient() {
  NetConfig cfg;
  cfg.window_len = 32;
  cfg.conv_stages = 1;
  cfg.filters = 4;
  cfg.kernel = 5;
  cfg.hidden = 8;
  cfg.num_classes = 4;
  cfg.seed = 3;
  std::vector<Example> batch;
  for (int i = 0; i < 8; ++i) {
    Example e;
    const auto w = white(32, 1.0, 500 + static_cast<std::uint64_t>(i));
    e.window.assign(w.samples().begin(), w.samples().end());
    e.label = i % 4;
    e.meta.transmitter_id = e.label;
    batch.push_back(std::move(e));
  }
  const double err = gradient_check(cfg, batch);
  return {err < 1e-4, fmt("max rel err = %.3g (< 1e-4)", err)};
}

// Random finite float bit patterns and random manifests, each through disk.
Outcome round_trips(const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::mt19937_64 gen(2024);
  int bin_ok = 0, man_ok = 0;
  const int cases = 128;
  for (int c = 0; c < cases; ++c) {
    const std::size_t n = gen() % 600;
    std::vector<Sample> v(n);
    std::uniform_int_distribution<std::uint32_t> bits;
    auto finite = [&] {
      float f;
      do {
        const std::uint32_t u = bits(gen);
        std::memcpy(&f, &u, sizeof f);
      } while (!std::isfinite(f));
      return static_cast<double>(f);
    };
    for (auto& z : v) z = {finite(), finite()};
    const IqBuffer x(std::move(v), 20e6);
    const auto path = dir / "rt.bin";
    write_iq_bin(x, path);
    const auto y = read_iq_bin(path, 20e6);
    bool same = y.size() == x.size();
    for (std::size_t k = 0; same && k < x.size(); ++k) {
      same = std::memcmp(&x[k], &y[k], sizeof(Sample)) == 0;
    }
    bin_ok += same && std::filesystem::file_size(path) == 8 * n;

    DatasetManifest m;
    m.header = {static_cast<int>(1 + gen() % 8), static_cast<double>(1 + gen() % 100) * 1e6, 16 * (1 + gen() % 32),
                std::string(kManifestFormat)};
    const std::size_t records = gen() % 40;
    std::filesystem::create_directories(dir / "m");
    for (std::size_t r = 0; r < records; ++r) {
      RecordingMeta meta;
      meta.waveform = kAllWaveforms[gen() % 3];
      meta.transmitter_id = static_cast<int>(gen() % static_cast<std::uint64_t>(m.header.num_transmitters));
      meta.day = gen() % 2 ? Day::Day1 : Day::Day2;
      if (gen() % 2) {
        meta.provenance = Provenance::augmented_by(std::string(to_string(kAllPolicies[gen() % 6])), gen());
      }
      const std::string rel = "f" + std::to_string(r) + ".bin";
      write_iq_bin(IqBuffer(std::vector<Sample>(gen() % 4), 1e6), dir / "m" / rel);
      m.records.push_back({rel, meta});
    }
    write_manifest(m, dir / "m" / "manifest.csv");
    const auto text = bytes_of(dir / "m" / "manifest.csv");
    const auto back = read_manifest(dir / "m" / "manifest.csv");
    write_manifest(back, dir / "m" / "again.csv");
    man_ok += back == m && bytes_of(dir / "m" / "again.csv") == text;
    std::filesystem::remove_all(dir / "m");
  }
  std::filesystem::remove_all(dir);
  return {bin_ok == cases && man_ok == cases,
          fmt(".bin %d/%d, manifest %d/%d bit-exact", bin_ok, cases, man_ok, cases)};
}

Outcome desk_experiment(const std::filesystem::path& out) {
  ExperimentConfig cfg = load_experiment_config(std::filesystem::path(RFAUG_CONFIG_DIR) / "experiment.ini");
  cfg.out_dir = out;
  const auto t0 = Clock::now();
  const auto table = run_experiment(cfg, [](const std::string& m) { std::fprintf(stderr, "  %s\n", m.c_str()); });
  const double minutes = seconds_since(t0) / 60.0;

  const ResultRow* noaug = nullptr;
  const ResultRow* decoupled = nullptr;
  for (const auto& r : table.rows) {
    std::printf("      %-16s day1 %.4f  day2 %.4f\n", std::string(to_string(r.policy)).c_str(), r.day1_acc, r.day2_acc);
    if (r.policy == AugmentationPolicy::NoAug) noaug = &r;
    if (r.policy == AugmentationPolicy::DecoupledCdlTdl) decoupled = &r;
  }
  if (!noaug || !decoupled) return {false, "default policies lack NoAug or DecoupledCdlTdl"};

  const bool a = noaug->day1_acc >= 0.90;
  const bool b = noaug->day1_acc - noaug->day2_acc >= 0.10;
  const bool c = decoupled->day2_acc - noaug->day2_acc >= 0.05;
  bool d = true;
  for (const auto& r : table.rows) {
    if (r.policy != AugmentationPolicy::NoAug) d = d && r.day2_acc >= noaug->day2_acc - 0.02;
  }
  const bool time_ok = minutes <= 30.0;
  return {a && b && c && d && time_ok && cfg.seeds.size() == 3,
          fmt("%zu seeds in %.1f min (<= 30); (a) %s NoAug day1 %.4f >= 0.90; (b) %s gap %.4f >= 0.10; "
              "(c) %s Decoupled-NoAug day2 %+.4f >= 0.05; (d) %s",
              cfg.seeds.size(), minutes, a ? "ok" : "FAIL", noaug->day1_acc, b ? "ok" : "FAIL",
              noaug->day1_acc - noaug->day2_acc, c ? "ok" : "FAIL", decoupled->day2_acc - noaug->day2_acc,
              d ? "ok" : "FAIL")};
}

Outcome cli_determinism(const std::filesystem::path& dir) {
  const std::string cli = RFAUG_CLI_PATH;
  const std::string smoke = std::string(RFAUG_CONFIG_DIR) + "/smoke.ini";
  for (const char* name : {"a", "b"}) {
    const std::string cmd = "'" + cli + "' experiment --config '" + smoke + "' --out '" + (dir / name).string() +
                            "' >/dev/null 2>&1";
    if (std::system(cmd.c_str()) != 0) return {false, std::string("CLI run ") + name + " failed"};
  }
  const auto a = bytes_of(dir / "a" / "results.csv");
  const auto b = bytes_of(dir / "b" / "results.csv");
  std::filesystem::remove_all(dir);
  return {!a.empty() && a == b, fmt("two CLI runs, results.csv %zu bytes, %s", a.size(),
                                    a == b ? "byte-identical" : "DIFFERENT")};
}

}  // namespace

int main(int argc, char** argv) {
  const bool skip_experiment = argc > 1 && std::string(argv[1]) == "--skip-experiment";
  const auto scratch = std::filesystem::temp_directory_path() / ("rfaug_acceptance_" + std::to_string(std::random_device{}()));

  criterion("channel identity", [] {
    const auto t0 = Clock::now();
    auto r = channel_identity();
    const double s = seconds_since(t0);
    r.pass = r.pass && s < 1.0;
    r.detail += fmt(", %.3f s (< 1 s)", s);
    return r;
  });
  criterion("delay-spread scaling", delay_spread_scaling);
  criterion("doppler statistics", [] {
    const auto t0 = Clock::now();
    auto r = doppler_statistics();
    const double s = seconds_since(t0);
    r.pass = r.pass && s < 10.0;
    r.detail += fmt(", %.2f s (< 10 s)", s);
    return r;
  });
  criterion("rician split", rician_split);
  criterion("awgn calibration", awgn_calibration);
  criterion("routing matrix", routing_matrix);
  criterion("gradient check", gradient);
  criterion("bin/manifest round trips", [&] { return round_trips(scratch / "rt"); });
  if (skip_experiment) {
    std::printf("SKIP  desk-scale experiment       (--skip-experiment)\n");
  } else {
    criterion("desk-scale experiment", [] { return desk_experiment("acceptance_experiment"); });
  }
  criterion("pipeline determinism", [&] { return cli_determinism(scratch / "cli"); });

  std::filesystem::remove_all(scratch);
  std::printf("%s: %d failing criteria\n", g_failures ? "FAIL" : "PASS", g_failures);
  return g_failures ? 1 : 0;
}
