#include "rfaug/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <sstream>

#include "rfaug/error.hpp"
#include "rfaug/random.hpp"
#include "rfaug/wavegen.hpp"

namespace rfaug {

namespace {

// Independent seed streams derived from the master seed.
enum Stream : std::uint64_t {
  kPayload = 1,
  kPhaseNoise = 2,
  kDayChannel = 3,
  kAugment = 4,
  kNetInit = 5,
  kCapturePhase = 6
};

std::uint64_t item_seed(std::uint64_t master, Stream stream, Day day, std::size_t item) {
  return mix_seed(mix_seed(mix_seed(master, stream), static_cast<std::uint64_t>(day)), item);
}

std::size_t kind_index(WaveformKind kind) { return static_cast<std::size_t>(kind); }

ChannelFamily parse_family(const std::string& text) {
  if (text == "Tdl" || text == "TDL") return ChannelFamily::Tdl;
  if (text == "Cdl" || text == "CDL") return ChannelFamily::Cdl;
  fail(ErrorKind::Config, "unknown channel family '" + text + "'");
}

bool get_bool(const KvConfig& cfg, const std::string& key, bool fallback) {
  if (!cfg.has(key)) return fallback;
  const auto v = cfg.get_string(key);
  if (v != "true" && v != "false") fail(ErrorKind::Config, key + " must be true or false");
  return v == "true";
}

std::vector<ProfileId> parse_ids(const std::vector<std::string>& items) {
  std::vector<ProfileId> out;
  for (const auto& s : items) out.push_back(parse_profile_id(s));
  return out;
}

ConditionSet conditions_from(const KvConfig& cfg, const std::string& section, ConditionSet set) {
  const std::string s = section + ".";
  if (cfg.has(s + "tdl_ids")) set.tdl_ids = parse_ids(cfg.get_strings(s + "tdl_ids"));
  if (cfg.has(s + "cdl_ids")) set.cdl_ids = parse_ids(cfg.get_strings(s + "cdl_ids"));
  if (cfg.has(s + "ds_range_ns")) {
    const auto r = cfg.get_range(s + "ds_range_ns");
    set.ds_range_s = {r.first * 1e-9, r.second * 1e-9};
  }
  if (cfg.has(s + "doppler_range_hz")) set.doppler_range_hz = cfg.get_range(s + "doppler_range_hz");
  if (cfg.has(s + "snr_range_db")) set.snr_range_db = cfg.get_range(s + "snr_range_db");
  return set;
}

// The day's conditions expressed as a plan so the augmentation draw can be reused.
AugmentationPlan as_plan(const ConditionSet& set) {
  AugmentationPlan plan;
  plan.tdl_ids = set.tdl_ids;
  plan.cdl_ids = set.cdl_ids;
  plan.ds_range_s = set.ds_range_s;
  plan.doppler_range_hz = set.doppler_range_hz;
  plan.snr_range_db = set.snr_range_db;
  return plan;
}

std::string accuracy_text(double acc) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6f", acc);
  return buf;
}

void report(const ProgressFn& progress, const std::string& msg) {
  if (progress) progress(msg);
}

std::string file_stem(int tx, WaveformKind kind, std::size_t burst) {
  return "tx" + std::to_string(tx) + "_" + std::string(to_string(kind)) + "_b" + std::to_string(burst);
}

}  // namespace

void ConditionSet::validate() const {
  auto check = [](std::pair<double, double> r, const char* what, double lo) {
    if (!(r.first <= r.second) || !(r.first >= lo) || !std::isfinite(r.second)) {
      fail(ErrorKind::Config, std::string("conditions: invalid ") + what + " range");
    }
  };
  check(ds_range_s, "delay spread", 0.0);
  check(doppler_range_hz, "Doppler", 0.0);
  check(snr_range_db, "SNR", -1e300);
  if (tdl_ids.empty() || cdl_ids.empty()) fail(ErrorKind::Config, "conditions: empty profile id set");
}

ExperimentConfig::ExperimentConfig() {
  using enum ProfileId;
  day1.tdl_ids = {D, E};
  day1.cdl_ids = {D, E};
  day1.ds_range_s = {10e-9, 50e-9};
  day1.doppler_range_hz = {0.0, 5.0};
  day1.snr_range_db = {25.0, 35.0};
  day2.tdl_ids = {A, B, C};
  day2.cdl_ids = {A, B, C};
  day2.ds_range_s = {20e-9, 60e-9};
  day2.doppler_range_hz = {0.0, 10.0};
  day2.snr_range_db = {15.0, 25.0};
  net.window_len = window_len;
  net.num_classes = static_cast<std::size_t>(num_tx);
}

void ExperimentConfig::validate() const {
  auto bad = [](const std::string& what) { fail(ErrorKind::Config, "experiment: " + what); };
  if (num_tx < 2) bad("num_tx must be >= 2");
  if (bank.transmitters.size() != static_cast<std::size_t>(num_tx)) {
    bad("fingerprint bank has " + std::to_string(bank.transmitters.size()) + " transmitters, num_tx is " +
        std::to_string(num_tx));
  }
  for (const auto& fp : bank.transmitters) fp.validate();
  if (bursts_per_day < 2) bad("bursts_per_day must be >= 2");
  if (!(sample_rate_hz > 0.0)) bad("sample_rate_hz must be > 0");
  if (window_len < 16 || stride < 1) bad("window_len must be >= 16 and stride >= 1");
  if (burst_samples < window_len) bad("burst_samples shorter than one window");
  if (!(holdout_fraction > 0.0 && holdout_fraction < 1.0)) bad("holdout_fraction must be in (0, 1)");
  std::size_t held = 0;
  for (std::size_t b = 0; b < bursts_per_day; ++b) held += is_holdout_burst(*this, b) ? 1 : 0;
  if (held == 0 || held == bursts_per_day) bad("holdout split leaves no training or no holdout files");
  day1.validate();
  day2.validate();
  if (day1.ds_range_s == day2.ds_range_s && day1.doppler_range_hz == day2.doppler_range_hz &&
      day1.snr_range_db == day2.snr_range_db) {
    bad("Day-1 and Day-2 conditions must differ in at least one range");
  }
  if (policies.empty()) bad("no policies to run");
  if (seeds.empty()) bad("no seeds");
  plan.validate();
  for (const auto p : policies) {
    AugmentationPlan probe = plan;
    probe.policy = p;
    probe.validate();
  }
  net.validate();
  if (net.window_len != window_len) bad("net.window_len must equal window_len");
  if (net.num_classes != static_cast<std::size_t>(num_tx)) bad("net.num_classes must equal num_tx");
}

ExperimentConfig experiment_config_from(const KvConfig& cfg, const std::filesystem::path& base_dir) {
  ExperimentConfig ec;
  const std::string s = "experiment.";
  auto size = [&](const char* key, std::size_t fallback) {
    const auto v = cfg.get_int(s + key, static_cast<std::int64_t>(fallback));
    if (v < 0) fail(ErrorKind::Config, "experiment: " + std::string(key) + " must be >= 0");
    return static_cast<std::size_t>(v);
  };
  ec.num_tx = static_cast<int>(cfg.get_int(s + "num_tx", ec.num_tx));
  ec.bursts_per_day = size("bursts_per_day", ec.bursts_per_day);
  ec.burst_samples = size("burst_samples", ec.burst_samples);
  ec.sample_rate_hz = cfg.get_double(s + "sample_rate_hz", ec.sample_rate_hz);
  ec.window_len = size("window_len", ec.window_len);
  ec.stride = size("stride", ec.stride);
  ec.holdout_fraction = cfg.get_double(s + "holdout_fraction", ec.holdout_fraction);
  if (cfg.has(s + "channel_fiveg")) ec.day_family[0] = parse_family(cfg.get_string(s + "channel_fiveg"));
  if (cfg.has(s + "channel_wifi")) ec.day_family[1] = parse_family(cfg.get_string(s + "channel_wifi"));
  if (cfg.has(s + "channel_lte")) ec.day_family[2] = parse_family(cfg.get_string(s + "channel_lte"));
  if (cfg.has(s + "policies")) {
    ec.policies.clear();
    for (const auto& p : cfg.get_strings(s + "policies")) ec.policies.push_back(parse_policy(p));
  }
  if (cfg.has(s + "seeds")) ec.seeds = cfg.get_u64s(s + "seeds");
  if (cfg.has(s + "out_dir")) {
    const std::filesystem::path out = cfg.get_string(s + "out_dir");
    ec.out_dir = out.is_absolute() ? out : base_dir / out;
  }
  ec.export_features = get_bool(cfg, s + "export_features", ec.export_features);
  ec.random_capture_phase = get_bool(cfg, s + "random_capture_phase", ec.random_capture_phase);
  if (cfg.has(s + "fingerprints")) {
    const std::filesystem::path p = cfg.get_string(s + "fingerprints");
    ec.bank = load_fingerprint_bank(p.is_absolute() ? p : base_dir / p);
  }
  ec.day1 = conditions_from(cfg, "day1", ec.day1);
  ec.day2 = conditions_from(cfg, "day2", ec.day2);
  if (cfg.has_section("plan")) ec.plan = plan_from_config(cfg);

  // The network's input and output widths follow the dataset unless set explicitly.
  KvConfig net_cfg = cfg;
  if (!cfg.has("net.window_len")) net_cfg.set("net.window_len", static_cast<std::int64_t>(ec.window_len));
  if (!cfg.has("net.num_classes")) net_cfg.set("net.num_classes", std::int64_t{ec.num_tx});
  ec.net = net_config_from(net_cfg);

  ec.validate();
  return ec;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  const KvConfig cfg = KvConfig::load(path);
  try {
    return experiment_config_from(cfg, path.parent_path());
  } catch (const Error& e) {
    fail(e.kind(), path.string() + ": " + e.what());
  }
}

bool is_holdout_burst(const ExperimentConfig& cfg, std::size_t burst_index) {
  const auto held = static_cast<std::size_t>(
      std::llround(cfg.holdout_fraction * static_cast<double>(cfg.bursts_per_day)));
  return burst_index + held >= cfg.bursts_per_day;
}

SynthOutput synth_dataset(const ExperimentConfig& cfg, std::uint64_t master_seed, const std::filesystem::path& out_dir) {
  namespace fs = std::filesystem;
  cfg.validate();
  SynthOutput out;
  for (const Day day : {Day::Day1, Day::Day2}) {
    const bool first = day == Day::Day1;
    const fs::path sub = first ? "day1" : "day2";
    std::error_code ec;
    fs::create_directories(out_dir / sub, ec);
    if (ec) fail(ErrorKind::Io, "cannot create " + (out_dir / sub).string() + ": " + ec.message());

    DatasetManifest& manifest = first ? out.day1 : out.day2;
    manifest.header.num_transmitters = cfg.num_tx;
    manifest.header.sample_rate_hz = cfg.sample_rate_hz;
    manifest.header.window_len = cfg.window_len;
    const AugmentationPlan conditions = as_plan(first ? cfg.day1 : cfg.day2);

    for (int tx = 0; tx < cfg.num_tx; ++tx) {
      for (const auto kind : kAllWaveforms) {
        const WaveformSpec spec = default_spec(kind);
        const std::size_t symbols = (cfg.burst_samples + spec.symbol_len() - 1) / spec.symbol_len();
        const Transform route =
            cfg.day_family[kind_index(kind)] == ChannelFamily::Cdl ? Transform::Cdl : Transform::Tdl;
        for (std::size_t b = 0; b < cfg.bursts_per_day; ++b) {
          const std::size_t item = (static_cast<std::size_t>(tx) * 3 + kind_index(kind)) * cfg.bursts_per_day + b;
          const IqBuffer burst = gen_burst(spec, symbols, item_seed(master_seed, kPayload, day, item), cfg.sample_rate_hz);
          const IqBuffer tx_out = apply_fingerprint(burst, cfg.bank.transmitters[static_cast<std::size_t>(tx)],
                                                    item_seed(master_seed, kPhaseNoise, day, item));
          const ChannelDraw draw = draw_channel(conditions, route, cfg.sample_rate_hz,
                                                item_seed(master_seed, kDayChannel, day, item));
          IqBuffer rx = apply_channel_draw(tx_out, draw.family, draw.profile, draw.config);
          if (cfg.random_capture_phase) {
            Rng rng(item_seed(master_seed, kCapturePhase, day, item));
            const Sample rot = std::polar(1.0, 2.0 * std::numbers::pi * rng.uniform());
            auto samples = std::move(rx).release();
            for (auto& v : samples) v *= rot;
            rx = IqBuffer(std::move(samples), cfg.sample_rate_hz);
          }

          const fs::path rel = sub / (file_stem(tx, kind, b) + ".bin");
          write_iq_bin(rx, out_dir / rel);
          manifest.records.push_back({rel, RecordingMeta{kind, tx, day, Provenance::original()}});
        }
      }
    }
    const fs::path mpath = out_dir / (first ? "manifest_day1.csv" : "manifest_day2.csv");
    write_manifest(manifest, mpath);
    (first ? out.day1_manifest : out.day2_manifest) = mpath;
  }
  return out;
}

std::vector<Example> load_windows(const DatasetManifest& manifest, const std::filesystem::path& base_dir,
                                  std::size_t window_len, std::size_t stride) {
  std::vector<Example> out;
  for (const auto& rec : manifest.records) {
    const IqBuffer x = read_iq_bin(resolve_record_path(base_dir, rec.path), manifest.header.sample_rate_hz);
    auto windows = slice_examples(x, rec.meta, window_len, stride);
    std::move(windows.begin(), windows.end(), std::back_inserter(out));
  }
  return out;
}

ResultRow run_policy(const ExperimentConfig& cfg, const SynthOutput& data, const std::filesystem::path& data_dir,
                     AugmentationPolicy policy, std::uint64_t master_seed, const std::filesystem::path& work_dir,
                     const ProgressFn& progress) {
  const std::string tag = std::string(to_string(policy));
  try {
    // Day-1 split by file. synth_dataset lists bursts innermost, so the burst
    // index is the record index modulo bursts_per_day.
    DatasetManifest train_files, holdout_files;
    train_files.header = holdout_files.header = data.day1.header;
    for (std::size_t i = 0; i < data.day1.records.size(); ++i) {
      const std::size_t burst = i % cfg.bursts_per_day;
      (is_holdout_burst(cfg, burst) ? holdout_files : train_files).records.push_back(data.day1.records[i]);
    }

    AugmentationPlan plan = cfg.plan;
    plan.policy = policy;
    plan.master_seed = mix_seed(master_seed, kAugment);
    const DatasetManifest expanded = augment_dataset(train_files, data_dir, plan, work_dir);
    write_manifest(expanded, work_dir / "manifest_train.csv");

    const auto train_set = load_windows(expanded, work_dir, cfg.window_len, cfg.stride);
    for (const auto& ex : train_set) {
      if (ex.meta.day != Day::Day1) fail(ErrorKind::Validation, "Day-2 data reached the training set");
    }
    report(progress, tag + ": training on " + std::to_string(train_set.size()) + " windows from " +
                         std::to_string(expanded.records.size()) + " files");

    NetConfig net = cfg.net;
    net.seed = mix_seed(master_seed, kNetInit);
    const TrainedModel model = train(train_set, net);
    if (!model.log.empty()) {
      const auto& last = model.log.back();
      report(progress, tag + ": final epoch loss " + accuracy_text(last.mean_loss) + ", train acc " +
                           accuracy_text(last.accuracy));
    }

    const auto holdout = load_windows(holdout_files, data_dir, cfg.window_len, cfg.stride);
    const auto day2 = load_windows(data.day2, data_dir, cfg.window_len, cfg.stride);
    ResultRow row{policy, evaluate(model.network, holdout).accuracy, evaluate(model.network, day2).accuracy};
    report(progress, tag + ": day1 " + accuracy_text(row.day1_acc) + ", day2 " + accuracy_text(row.day2_acc));

    if (cfg.export_features) {
      std::vector<Example> both = holdout;
      both.insert(both.end(), day2.begin(), day2.end());
      export_features(model.network, both, work_dir / ("features_" + tag + ".csv"));
    }
    save_model(model.network, work_dir / ("model_" + tag + ".bin"));
    return row;
  } catch (const Error& e) {
    fail(e.kind(), "policy " + tag + ": " + e.what());
  }
}

ResultTable run_experiment(const ExperimentConfig& cfg, const ProgressFn& progress) {
  namespace fs = std::filesystem;
  cfg.validate();
  ResultTable table;
  for (const auto seed : cfg.seeds) {
    const fs::path seed_dir = cfg.out_dir / ("seed_" + std::to_string(seed));
    const fs::path data_dir = seed_dir / "data";
    report(progress, "seed " + std::to_string(seed) + ": synthesizing Day-1/Day-2 captures");
    SynthOutput data;
    try {
      data = synth_dataset(cfg, seed, data_dir);
    } catch (const Error& e) {
      fail(e.kind(), "synth (seed " + std::to_string(seed) + "): " + e.what());
    }
    SeedResult result{seed, {}};
    for (const auto policy : cfg.policies) {
      const fs::path work = seed_dir / std::string(to_string(policy));
      result.rows.push_back(run_policy(cfg, data, data_dir, policy, seed, work, progress));
    }
    write_results_csv(result.rows, cfg.out_dir / ("results_seed" + std::to_string(seed) + ".csv"));
    table.per_seed.push_back(std::move(result));
  }

  const double n = static_cast<double>(table.per_seed.size());
  for (std::size_t p = 0; p < cfg.policies.size(); ++p) {
    ResultRow mean{cfg.policies[p], 0.0, 0.0};
    for (const auto& s : table.per_seed) {
      mean.day1_acc += s.rows[p].day1_acc / n;
      mean.day2_acc += s.rows[p].day2_acc / n;
    }
    table.rows.push_back(mean);
  }
  write_results_csv(table.rows, cfg.out_dir / "results.csv");

  std::ofstream txt(cfg.out_dir / "results.txt", std::ios::trunc);
  if (!txt) fail(ErrorKind::Io, "cannot write " + (cfg.out_dir / "results.txt").string());
  txt << format_results_table(table, cfg);
  return table;
}

void write_results_csv(const std::vector<ResultRow>& rows, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) fail(ErrorKind::Io, "cannot open " + path.string() + " for writing");
  out << "policy,day1_acc,day2_acc\n";
  for (const auto& r : rows) {
    out << to_string(r.policy) << ',' << accuracy_text(r.day1_acc) << ',' << accuracy_text(r.day2_acc) << '\n';
  }
  if (!out) fail(ErrorKind::Io, "write error on " + path.string());
}

std::vector<ResultRow> read_results_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::Io, "cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != "policy,day1_acc,day2_acc") {
    fail(ErrorKind::Format, path.string() + ": missing results header");
  }
  std::vector<ResultRow> rows;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto cells = split_list(line);
    if (cells.size() != 3) fail(ErrorKind::Parse, path.string() + " line " + std::to_string(lineno) + ": expected 3 cells");
    auto number = [&](const std::string& cell) {
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (ec != std::errc() || ptr != cell.data() + cell.size()) {
        fail(ErrorKind::Parse, path.string() + " line " + std::to_string(lineno) + ": bad accuracy '" + cell + "'");
      }
      return v;
    };
    rows.push_back({parse_policy(cells[0]), number(cells[1]), number(cells[2])});
  }
  return rows;
}

std::string format_results_table(const ResultTable& table, const ExperimentConfig& cfg) {
  std::ostringstream out;
  const auto held = static_cast<std::size_t>(
      std::llround(cfg.holdout_fraction * static_cast<double>(cfg.bursts_per_day)));
  out << "Cross-day transmitter identification, " << cfg.num_tx << " transmitters, " << table.per_seed.size()
      << " seed(s)\n";
  out << "Day-1 split by file: " << cfg.bursts_per_day - held << " training / " << held
      << " held-out burst(s) per (transmitter, waveform); Day-2 fully held out\n\n";
  out << std::left << std::setw(30) << "Approach" << std::right << std::setw(10) << "Day-1" << std::setw(10)
      << "Day-2" << '\n';
  out << std::string(50, '-') << '\n';
  out << std::fixed << std::setprecision(2);
  for (const auto& r : table.rows) {
    out << std::left << std::setw(30) << display_name(r.policy) << std::right << std::setw(9) << 100.0 * r.day1_acc
        << '%' << std::setw(9) << 100.0 * r.day2_acc << "%\n";
  }
  return out.str();
}

}  // namespace rfaug
