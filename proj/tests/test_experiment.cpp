#include <algorithm>
#include <fstream>
#include <set>

#include <doctest.h>

#include "rfaug/experiment.hpp"
#include "support.hpp"

using namespace rfaug;
using testing::error_kind;
using testing::TempDir;

namespace {

ExperimentConfig tiny(const std::filesystem::path& out) {
  ExperimentConfig cfg;
  cfg.bursts_per_day = 5;
  cfg.burst_samples = 1024;
  cfg.plan.copies_per_example = 1;
  cfg.net.filters = 4;
  cfg.net.hidden = 8;
  cfg.net.epochs = 1;
  cfg.net.batch_size = 32;
  cfg.seeds = {5};
  cfg.out_dir = out;
  return cfg;
}

}  // namespace

TEST_CASE("default configuration is valid and the days differ") {
  const ExperimentConfig cfg;
  cfg.validate();
  CHECK(cfg.num_tx == 4);
  CHECK(cfg.policies.size() == 5);
  CHECK(cfg.seeds.size() == 3);
  CHECK(cfg.net.epochs == 16);
  CHECK_FALSE(cfg.day1 == cfg.day2);
}

TEST_CASE("configuration validation") {
  ExperimentConfig cfg;
  cfg.day2 = cfg.day1;
  CHECK(error_kind([&] { cfg.validate(); }) == ErrorKind::Config);
  cfg = {};
  cfg.num_tx = 3;
  CHECK(error_kind([&] { cfg.validate(); }) == ErrorKind::Config);
  cfg = {};
  cfg.holdout_fraction = 0.01;
  CHECK(error_kind([&] { cfg.validate(); }) == ErrorKind::Config);
  cfg = {};
  cfg.net.window_len = 128;
  CHECK(error_kind([&] { cfg.validate(); }) == ErrorKind::Config);
  cfg = {};
  cfg.policies.clear();
  CHECK(error_kind([&] { cfg.validate(); }) == ErrorKind::Config);
}

TEST_CASE("holdout keeps the last fifth of each group's bursts") {
  ExperimentConfig cfg;
  cfg.bursts_per_day = 5;
  for (std::size_t b = 0; b < 5; ++b) CHECK(is_holdout_burst(cfg, b) == (b == 4));
  cfg.bursts_per_day = 10;
  for (std::size_t b = 0; b < 10; ++b) CHECK(is_holdout_burst(cfg, b) == (b >= 8));
}

TEST_CASE("synthesis writes sixty Day-1 files for 4 transmitters, 3 kinds, 5 bursts") {
  TempDir dir("experiment");
  const auto cfg = tiny(dir.path());
  const auto out = synth_dataset(cfg, 1, dir / "data");
  CHECK(out.day1.records.size() == 60);
  CHECK(out.day2.records.size() == 60);
  for (auto kind : kAllWaveforms) {
    CHECK(std::count_if(out.day1.records.begin(), out.day1.records.end(),
                        [&](const ManifestRecord& r) { return r.meta.waveform == kind; }) == 20);
  }
  for (const auto& r : out.day1.records) CHECK(r.meta.day == Day::Day1);
  for (const auto& r : out.day2.records) CHECK(r.meta.day == Day::Day2);
  CHECK(read_manifest(out.day1_manifest) == out.day1);
  CHECK(read_manifest(out.day2_manifest) == out.day2);
  const auto windows = load_windows(out.day1, dir / "data", cfg.window_len, cfg.stride);
  CHECK(windows.size() >= 60 * (1024 / 256));
}

TEST_CASE("synthesis is deterministic and the days differ file by file") {
  TempDir dir("experiment");
  const auto cfg = tiny(dir.path());
  const auto a = synth_dataset(cfg, 9, dir / "a");
  const auto b = synth_dataset(cfg, 9, dir / "b");
  const auto c = synth_dataset(cfg, 10, dir / "c");
  CHECK(testing::read_text(a.day1_manifest) == testing::read_text(b.day1_manifest));
  for (std::size_t i = 0; i < a.day1.records.size(); ++i) {
    const auto fa = testing::read_bytes(dir / "a" / a.day1.records[i].path);
    CHECK(fa == testing::read_bytes(dir / "b" / b.day1.records[i].path));
    CHECK_FALSE(fa == testing::read_bytes(dir / "a" / a.day2.records[i].path));
    CHECK_FALSE(fa == testing::read_bytes(dir / "c" / c.day1.records[i].path));
  }
}

TEST_CASE("results CSV round trips at six decimals") {
  TempDir dir("experiment");
  const std::vector<ResultRow> rows{{AugmentationPolicy::NoAug, 0.9725, 0.59375},
                                    {AugmentationPolicy::DecoupledCdlTdl, 1.0, 0.0}};
  write_results_csv(rows, dir / "r.csv");
  CHECK(testing::read_text(dir / "r.csv") ==
        "policy,day1_acc,day2_acc\nNoAug,0.972500,0.593750\nDecoupledCdlTdl,1.000000,0.000000\n");
  const auto back = read_results_csv(dir / "r.csv");
  REQUIRE(back.size() == 2);
  CHECK(back[1].policy == AugmentationPolicy::DecoupledCdlTdl);
  CHECK(back[0].day2_acc == 0.59375);
  testing::write_bytes(dir / "bad.csv", {'x', '\n'});
  CHECK(error_kind([&] { (void)read_results_csv(dir / "bad.csv"); }) == ErrorKind::Format);
  {
    std::ofstream out(dir / "row.csv");
    out << "policy,day1_acc,day2_acc\nNoAug,0.5,abc\n";
  }
  CHECK(error_kind([&] { (void)read_results_csv(dir / "row.csv"); }) == ErrorKind::Parse);
}

TEST_CASE("full protocol on a tiny configuration") {
  TempDir dir("experiment");
  const auto cfg = tiny(dir / "run");
  std::vector<std::string> messages;
  const auto table = run_experiment(cfg, [&](const std::string& m) { messages.push_back(m); });
  CHECK_FALSE(messages.empty());

  REQUIRE(table.rows.size() == 5);
  for (std::size_t i = 0; i < 5; ++i) {
    CHECK(table.rows[i].policy == cfg.policies[i]);
    CHECK(table.rows[i].day1_acc >= 0.0);
    CHECK(table.rows[i].day1_acc <= 1.0);
    CHECK(table.rows[i].day2_acc >= 0.0);
    CHECK(table.rows[i].day2_acc <= 1.0);
  }
  REQUIRE(table.per_seed.size() == 1);
  CHECK(table.per_seed[0].seed == 5);

  const auto run = dir / "run";
  CHECK(std::filesystem::exists(run / "results.csv"));
  CHECK(std::filesystem::exists(run / "results_seed5.csv"));
  const auto text = testing::read_text(run / "results.txt");
  CHECK(text.find("Without Augmentation") != std::string::npos);
  CHECK(text.find("CDL+TDL Augmentation") != std::string::npos);
  CHECK(text.find("held-out") != std::string::npos);
  CHECK(read_results_csv(run / "results.csv").size() == 5);

  for (auto p : cfg.policies) {
    const auto work = run / "seed_5" / std::string(to_string(p));
    CHECK(std::filesystem::exists(work / ("features_" + std::string(to_string(p)) + ".csv")));
    CHECK(std::filesystem::exists(work / ("model_" + std::string(to_string(p)) + ".bin")));
    // Training only ever sees Day-1 files outside the holdout.
    const auto train = read_manifest(work / "manifest_train.csv");
    for (const auto& r : train.records) {
      CHECK(r.meta.day == Day::Day1);
      const auto stem = r.path.stem().string();
      CHECK(stem.find("_b4") == std::string::npos);
    }
  }
}

TEST_CASE("the protocol is reproducible") {
  TempDir dir("experiment");
  auto cfg = tiny(dir / "one");
  cfg.policies = {AugmentationPolicy::NoAug, AugmentationPolicy::WifiOnlyTdl};
  cfg.export_features = false;
  (void)run_experiment(cfg);
  cfg.out_dir = dir / "two";
  (void)run_experiment(cfg);
  CHECK(testing::read_bytes(dir / "one" / "results.csv") == testing::read_bytes(dir / "two" / "results.csv"));
  CHECK_FALSE(std::filesystem::exists(dir / "one" / "seed_5" / "NoAug" / "features_NoAug.csv"));
}
