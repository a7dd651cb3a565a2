#include "rfaug/wavegen.hpp"

#include <bit>
#include <cmath>
#include <memory>

#include <fftw3.h>

#include "rfaug/error.hpp"
#include "rfaug/random.hpp"

namespace rfaug {

namespace {

struct FftwFree {
  void operator()(fftw_complex* p) const noexcept { fftw_free(p); }
};
struct PlanDestroy {
  void operator()(fftw_plan_s* p) const noexcept { fftw_destroy_plan(p); }
};
using FftwArray = std::unique_ptr<fftw_complex[], FftwFree>;
using FftwPlan = std::unique_ptr<fftw_plan_s, PlanDestroy>;

}  // namespace

void WaveformSpec::validate() const {
  if (fft_size < 4 || !std::has_single_bit(fft_size)) {
    fail(ErrorKind::Config, "fft_size must be a power of two >= 4");
  }
  if (cp_len == 0 || cp_len >= fft_size) fail(ErrorKind::Config, "cp_len must lie in [1, fft_size)");
  if (occupied_subcarriers == 0 || occupied_subcarriers > fft_size - 2) {
    fail(ErrorKind::Config, "occupied_subcarriers must lie in [1, fft_size - 2]");
  }
}

WaveformSpec default_spec(WaveformKind kind) {
  switch (kind) {
    case WaveformKind::FiveG: return {kind, 512, 36, 300};
    case WaveformKind::Wifi: return {kind, 64, 16, 52};
    case WaveformKind::Lte: return {kind, 512, 40, 300};
  }
  return {};
}

std::vector<std::size_t> occupied_bins(const WaveformSpec& spec) {
  spec.validate();
  const std::size_t positive = (spec.occupied_subcarriers + 1) / 2;
  const std::size_t negative = spec.occupied_subcarriers / 2;
  std::vector<std::size_t> bins;
  bins.reserve(spec.occupied_subcarriers);
  for (std::size_t k = 1; k <= positive; ++k) bins.push_back(k);
  for (std::size_t k = 1; k <= negative; ++k) bins.push_back(spec.fft_size - k);
  return bins;
}

IqBuffer gen_burst(const WaveformSpec& spec, std::size_t num_symbols, std::uint64_t payload_seed,
                   double sample_rate_hz) {
  spec.validate();
  if (num_symbols < 1) fail(ErrorKind::InvalidArgument, "num_symbols must be >= 1");

  const std::size_t n = spec.fft_size;
  const auto bins = occupied_bins(spec);
  FftwArray freq(fftw_alloc_complex(n));
  FftwArray time(fftw_alloc_complex(n));
  FftwPlan plan(fftw_plan_dft_1d(static_cast<int>(n), freq.get(), time.get(), FFTW_BACKWARD,
                                 FFTW_ESTIMATE));

  Rng rng(payload_seed);
  const double a = 1.0 / std::sqrt(2.0);
  std::vector<Sample> out;
  out.reserve(num_symbols * spec.symbol_len());
  for (std::size_t s = 0; s < num_symbols; ++s) {
    for (std::size_t k = 0; k < n; ++k) freq[k][0] = freq[k][1] = 0.0;
    for (const auto bin : bins) {
      const std::uint64_t bits = rng.next_u64();
      freq[bin][0] = (bits & 1U) ? a : -a;
      freq[bin][1] = (bits & 2U) ? a : -a;
    }
    fftw_execute(plan.get());
    for (std::size_t k = n - spec.cp_len; k < n; ++k) out.emplace_back(time[k][0], time[k][1]);
    for (std::size_t k = 0; k < n; ++k) out.emplace_back(time[k][0], time[k][1]);
  }
  return normalize_power(IqBuffer(std::move(out), sample_rate_hz));
}

}  // namespace rfaug
