#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "rfaug/augment.hpp"
#include "rfaug/channel.hpp"
#include "rfaug/classifier.hpp"
#include "rfaug/config.hpp"
#include "rfaug/impairments.hpp"
#include "rfaug/manifest.hpp"

namespace rfaug {

/// Propagation conditions a capture day is recorded under.
struct ConditionSet {
  std::vector<ProfileId> tdl_ids{ProfileId::A, ProfileId::B, ProfileId::C};
  std::vector<ProfileId> cdl_ids{ProfileId::A, ProfileId::B, ProfileId::C};
  std::pair<double, double> ds_range_s{30e-9, 100e-9};
  std::pair<double, double> doppler_range_hz{0.0, 5.0};
  std::pair<double, double> snr_range_db{20.0, 30.0};

  void validate() const;
  friend bool operator==(const ConditionSet&, const ConditionSet&) = default;
};

struct ExperimentConfig {
  int num_tx = 4;
  std::size_t bursts_per_day = 10;  // per (transmitter, waveform kind)
  std::size_t burst_samples = 4096;  // minimum; rounded up to whole OFDM symbols
  double sample_rate_hz = 20e6;
  std::size_t window_len = 256;
  std::size_t stride = 256;
  double holdout_fraction = 0.2;  // Day-1 files per (tx, kind) kept out of training
  /// Channel family each waveform kind propagates through, indexed FiveG, Wifi, Lte.
  std::array<ChannelFamily, 3> day_family{ChannelFamily::Cdl, ChannelFamily::Tdl, ChannelFamily::Tdl};
  /// Day-1 is LOS-dominant and clean; Day-2 moves to NLOS profiles at lower SNR.
  ConditionSet day1;
  ConditionSet day2;
  FingerprintBank bank = default_fingerprint_bank();
  AugmentationPlan plan;  // policy is overridden per run
  std::vector<AugmentationPolicy> policies{AugmentationPolicy::NoAug, AugmentationPolicy::UniformCdl,
                                           AugmentationPolicy::FiveGOnlyCdl, AugmentationPolicy::WifiOnlyTdl,
                                           AugmentationPolicy::DecoupledCdlTdl};
  NetConfig net;
  std::vector<std::uint64_t> seeds{1, 2, 3};
  std::filesystem::path out_dir = "rfaug_out";
  bool export_features = true;
  /// Rotate each capture by a uniformly random carrier phase, as an
  /// unsynchronized receiver would see it.
  bool random_capture_phase = false;

  ExperimentConfig();
  /// Throws Config if the day condition sets coincide, the bank size differs
  /// from num_tx, no file is left for training or holdout, and so on.
  void validate() const;
};

/// Reads [experiment], [day1], [day2], [plan] and [net]. A relative
/// `fingerprints` path is resolved against `base_dir`.
ExperimentConfig experiment_config_from(const KvConfig& cfg, const std::filesystem::path& base_dir = ".");
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

struct SynthOutput {
  DatasetManifest day1;
  DatasetManifest day2;
  std::filesystem::path day1_manifest;  // written paths
  std::filesystem::path day2_manifest;
};

/// For each (day, tx, kind, burst): OFDM burst, the transmitter fingerprint,
/// one channel draw from that day's conditions, AWGN. Writes
/// `out_dir/day{1,2}/*.bin` and `out_dir/manifest_day{1,2}.csv`.
SynthOutput synth_dataset(const ExperimentConfig& cfg, std::uint64_t master_seed, const std::filesystem::path& out_dir);

/// True for Day-1 files held out of training (the last files of each
/// (tx, kind) group, by burst index).
bool is_holdout_burst(const ExperimentConfig& cfg, std::size_t burst_index);

/// Slices every record of a manifest into labelled windows.
std::vector<Example> load_windows(const DatasetManifest& manifest, const std::filesystem::path& base_dir,
                                  std::size_t window_len, std::size_t stride);

struct ResultRow {
  AugmentationPolicy policy = AugmentationPolicy::NoAug;
  double day1_acc = 0.0;
  double day2_acc = 0.0;
};

struct SeedResult {
  std::uint64_t seed = 0;
  std::vector<ResultRow> rows;
};

struct ResultTable {
  std::vector<ResultRow> rows;  // means over seeds, in cfg.policies order
  std::vector<SeedResult> per_seed;
};

using ProgressFn = std::function<void(const std::string&)>;

/// One policy on one synthesized dataset: augment the Day-1 training files,
/// train, then score held-out Day-1 windows and every Day-2 window.
ResultRow run_policy(const ExperimentConfig& cfg, const SynthOutput& data, const std::filesystem::path& data_dir,
                     AugmentationPolicy policy, std::uint64_t master_seed, const std::filesystem::path& work_dir,
                     const ProgressFn& progress = {});

/// Full protocol over every seed and policy. Writes results.csv (means),
/// results_seed<N>.csv, results.txt and, if enabled, per-policy feature CSVs.
ResultTable run_experiment(const ExperimentConfig& cfg, const ProgressFn& progress = {});

/// `policy,day1_acc,day2_acc` with fixed six-decimal accuracies.
void write_results_csv(const std::vector<ResultRow>& rows, const std::filesystem::path& path);
std::vector<ResultRow> read_results_csv(const std::filesystem::path& path);
std::string format_results_table(const ResultTable& table, const ExperimentConfig& cfg);

}  // namespace rfaug
