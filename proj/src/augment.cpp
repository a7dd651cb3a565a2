#include "rfaug/augment.hpp"

#include <cmath>

#include "rfaug/error.hpp"
#include "rfaug/random.hpp"

namespace rfaug {

namespace {

std::vector<ProfileId> parse_ids(const std::vector<std::string>& items) {
  std::vector<ProfileId> out;
  for (const auto& s : items) out.push_back(parse_profile_id(s));
  return out;
}

std::string join_ids(const std::vector<ProfileId>& ids) {
  std::string out;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (i) out += ',';
    out += to_string(ids[i]);
  }
  return out;
}

std::string join_range(std::pair<double, double> r, double unit = 1.0) {
  return format_double(r.first / unit) + "," + format_double(r.second / unit);
}

bool routes_to(AugmentationPolicy policy, Transform t) {
  for (auto kind : kAllWaveforms) {
    if (select_transform(policy, kind) == t) return true;
  }
  return false;
}

}  // namespace

std::string_view to_string(AugmentationPolicy policy) {
  switch (policy) {
    case AugmentationPolicy::NoAug: return "NoAug";
    case AugmentationPolicy::UniformTdl: return "UniformTdl";
    case AugmentationPolicy::UniformCdl: return "UniformCdl";
    case AugmentationPolicy::FiveGOnlyCdl: return "FiveGOnlyCdl";
    case AugmentationPolicy::WifiOnlyTdl: return "WifiOnlyTdl";
    case AugmentationPolicy::DecoupledCdlTdl: return "DecoupledCdlTdl";
  }
  return "?";
}

std::string_view to_string(Transform transform) {
  switch (transform) {
    case Transform::Cdl: return "Cdl";
    case Transform::Tdl: return "Tdl";
    case Transform::Passthrough: return "Passthrough";
  }
  return "?";
}

std::string_view display_name(AugmentationPolicy policy) {
  switch (policy) {
    case AugmentationPolicy::NoAug: return "Without Augmentation";
    case AugmentationPolicy::UniformTdl: return "TDL-based Augmentation";
    case AugmentationPolicy::UniformCdl: return "CDL-based Augmentation";
    case AugmentationPolicy::FiveGOnlyCdl: return "5G-only-CDL Augmentation";
    case AugmentationPolicy::WifiOnlyTdl: return "WiFi-only-TDL Augmentation";
    case AugmentationPolicy::DecoupledCdlTdl: return "CDL+TDL Augmentation";
  }
  return "?";
}

AugmentationPolicy parse_policy(std::string_view text) {
  for (auto p : kAllPolicies) {
    if (text == to_string(p) || text == display_name(p)) return p;
  }
  if (text == "CDL+TDL") return AugmentationPolicy::DecoupledCdlTdl;
  if (text == "5G-only-CDL") return AugmentationPolicy::FiveGOnlyCdl;
  if (text == "WiFi-only-TDL") return AugmentationPolicy::WifiOnlyTdl;
  fail(ErrorKind::Parse, "unknown augmentation policy '" + std::string(text) + "'");
}

void AugmentationPlan::validate() const {
  if (copies_per_example < 1) fail(ErrorKind::Config, "plan: copies_per_example must be >= 1");
  auto check = [](std::pair<double, double> r, const char* what, double lo) {
    if (!(r.first <= r.second) || !(r.first >= lo) || !std::isfinite(r.second)) {
      fail(ErrorKind::Config, std::string("plan: invalid ") + what + " range");
    }
  };
  check(ds_range_s, "delay spread", 0.0);
  check(doppler_range_hz, "Doppler", 0.0);
  check(snr_range_db, "SNR", -1e300);
  if (routes_to(policy, Transform::Tdl) && tdl_ids.empty()) {
    fail(ErrorKind::Config, "plan: policy routes to TDL but tdl_ids is empty");
  }
  if (routes_to(policy, Transform::Cdl) && cdl_ids.empty()) {
    fail(ErrorKind::Config, "plan: policy routes to CDL but cdl_ids is empty");
  }
}

AugmentationPlan plan_from_config(const KvConfig& cfg, const std::string& section) {
  const std::string s = section + ".";
  AugmentationPlan plan;
  if (cfg.has(s + "policy")) plan.policy = parse_policy(cfg.get_string(s + "policy"));
  const auto copies = cfg.get_int(s + "copies_per_example", static_cast<std::int64_t>(plan.copies_per_example));
  if (copies < 1) fail(ErrorKind::Config, "plan: copies_per_example must be >= 1");
  plan.copies_per_example = static_cast<std::size_t>(copies);
  if (cfg.has(s + "tdl_ids")) plan.tdl_ids = parse_ids(cfg.get_strings(s + "tdl_ids"));
  if (cfg.has(s + "cdl_ids")) plan.cdl_ids = parse_ids(cfg.get_strings(s + "cdl_ids"));
  if (cfg.has(s + "ds_range_ns")) {
    const auto r = cfg.get_range(s + "ds_range_ns");
    plan.ds_range_s = {r.first * 1e-9, r.second * 1e-9};
  }
  if (cfg.has(s + "doppler_range_hz")) plan.doppler_range_hz = cfg.get_range(s + "doppler_range_hz");
  if (cfg.has(s + "snr_range_db")) plan.snr_range_db = cfg.get_range(s + "snr_range_db");
  plan.master_seed = cfg.get_u64(s + "master_seed", plan.master_seed);
  plan.validate();
  return plan;
}

void plan_to_config(const AugmentationPlan& plan, KvConfig& cfg, const std::string& section) {
  const std::string s = section + ".";
  cfg.set(s + "policy", std::string(to_string(plan.policy)));
  cfg.set(s + "copies_per_example", static_cast<std::int64_t>(plan.copies_per_example));
  cfg.set(s + "tdl_ids", join_ids(plan.tdl_ids));
  cfg.set(s + "cdl_ids", join_ids(plan.cdl_ids));
  cfg.set(s + "ds_range_ns", join_range(plan.ds_range_s, 1e-9));
  cfg.set(s + "doppler_range_hz", join_range(plan.doppler_range_hz));
  cfg.set(s + "snr_range_db", join_range(plan.snr_range_db));
  cfg.set(s + "master_seed", std::to_string(plan.master_seed));
}

AugmentationPlan load_plan(const std::filesystem::path& path) { return plan_from_config(KvConfig::load(path)); }

void save_plan(const AugmentationPlan& plan, const std::filesystem::path& path) {
  KvConfig cfg;
  plan_to_config(plan, cfg);
  cfg.save(path);
}

std::uint64_t copy_seed(std::uint64_t master_seed, std::uint64_t item_index, std::size_t copy) {
  return mix_seed(mix_seed(master_seed, item_index), copy);
}

ChannelDraw draw_channel(const AugmentationPlan& plan, Transform transform, double sample_rate_hz,
                         std::uint64_t seed) {
  if (transform == Transform::Passthrough) {
    fail(ErrorKind::InvalidArgument, "no channel draw for a passthrough route");
  }
  Rng rng(seed);
  ChannelDraw draw;
  draw.family = transform == Transform::Cdl ? ChannelFamily::Cdl : ChannelFamily::Tdl;
  const auto& ids = transform == Transform::Cdl ? plan.cdl_ids : plan.tdl_ids;
  draw.profile = ids[rng.below(ids.size())];
  draw.config.delay_spread_s = rng.uniform(plan.ds_range_s.first, plan.ds_range_s.second);
  draw.config.max_doppler_hz = rng.uniform(plan.doppler_range_hz.first, plan.doppler_range_hz.second);
  draw.config.snr_db = rng.uniform(plan.snr_range_db.first, plan.snr_range_db.second);
  draw.config.sample_rate_hz = sample_rate_hz;
  draw.config.seed = seed;
  return draw;
}

std::vector<AugmentedRecording> augment_recording(const IqBuffer& x, const RecordingMeta& meta,
                                                  const AugmentationPlan& plan, std::uint64_t item_index) {
  plan.validate();
  if (meta.provenance.augmented) {
    fail(ErrorKind::Config, "augment_recording expects an original recording");
  }
  if (meta.day != Day::Day1) fail(ErrorKind::Config, "augmentation only applies to Day-1 data");

  std::vector<AugmentedRecording> out;
  const Transform route = select_transform(plan.policy, meta.waveform);
  if (route == Transform::Passthrough) return out;

  out.reserve(plan.copies_per_example);
  for (std::size_t c = 0; c < plan.copies_per_example; ++c) {
    const std::uint64_t seed = copy_seed(plan.master_seed, item_index, c);
    ChannelDraw draw = draw_channel(plan, route, x.sample_rate_hz(), seed);
    IqBuffer y = apply_channel_draw(x, draw.family, draw.profile, draw.config);
    RecordingMeta m = meta;
    m.provenance = Provenance::augmented_by(std::string(to_string(plan.policy)), seed);
    out.push_back({std::move(y), std::move(m), std::move(draw)});
  }
  return out;
}

DatasetManifest augment_dataset(const DatasetManifest& manifest, const std::filesystem::path& manifest_dir,
                                const AugmentationPlan& plan, const std::filesystem::path& out_dir) {
  namespace fs = std::filesystem;
  validate_manifest_fields(manifest);
  plan.validate();
  for (const auto& r : manifest.records) {
    if (r.meta.day != Day::Day1 || r.meta.provenance.augmented) {
      fail(ErrorKind::Config, "augment_dataset: " + r.path.string() + " is not an original Day-1 record");
    }
  }

  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) fail(ErrorKind::Io, "cannot create " + out_dir.string() + ": " + ec.message());
  const fs::path abs_out = fs::weakly_canonical(fs::absolute(out_dir));

  DatasetManifest out;
  out.header = manifest.header;
  for (std::size_t i = 0; i < manifest.records.size(); ++i) {
    const auto& rec = manifest.records[i];
    const fs::path source = fs::weakly_canonical(fs::absolute(resolve_record_path(manifest_dir, rec.path)));
    out.records.push_back({source.lexically_relative(abs_out), rec.meta});

    if (select_transform(plan.policy, rec.meta.waveform) == Transform::Passthrough) continue;
    try {
      const IqBuffer x = read_iq_bin(source, manifest.header.sample_rate_hz);
      const auto copies = augment_recording(x, rec.meta, plan, i);
      if (!copies.empty()) {
        fs::create_directories(abs_out / "aug", ec);
        if (ec) fail(ErrorKind::Io, "cannot create " + (abs_out / "aug").string());
      }
      for (std::size_t c = 0; c < copies.size(); ++c) {
        const fs::path rel = fs::path("aug") / (rec.path.stem().string() + "_" +
                                                std::string(to_string(plan.policy)) + "_c" +
                                                std::to_string(c) + ".bin");
        write_iq_bin(copies[c].buffer, abs_out / rel);
        out.records.push_back({rel, copies[c].meta});
      }
    } catch (const Error& e) {
      fail(e.kind(), "record " + std::to_string(i) + " (" + rec.path.string() + "): " + e.what());
    }
  }
  return out;
}

}  // namespace rfaug
