#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string_view>
#include <utility>
#include <vector>

#include "rfaug/channel.hpp"
#include "rfaug/config.hpp"
#include "rfaug/iq.hpp"
#include "rfaug/manifest.hpp"

namespace rfaug {

enum class AugmentationPolicy { NoAug, UniformTdl, UniformCdl, FiveGOnlyCdl, WifiOnlyTdl, DecoupledCdlTdl };

inline constexpr AugmentationPolicy kAllPolicies[] = {
    AugmentationPolicy::NoAug,        AugmentationPolicy::UniformTdl,  AugmentationPolicy::UniformCdl,
    AugmentationPolicy::FiveGOnlyCdl, AugmentationPolicy::WifiOnlyTdl, AugmentationPolicy::DecoupledCdlTdl};

enum class Transform { Cdl, Tdl, Passthrough };

std::string_view to_string(AugmentationPolicy policy);
std::string_view to_string(Transform transform);
/// Accepts the enum spelling ("DecoupledCdlTdl") or the report label ("CDL+TDL").
AugmentationPolicy parse_policy(std::string_view text);
/// Row label used in the accuracy table.
std::string_view display_name(AugmentationPolicy policy);

/// Which channel transform a policy applies to a waveform kind:
///
///   policy           FiveG  Wifi  Lte
///   NoAug            -      -     -
///   UniformTdl       TDL    TDL   TDL
///   UniformCdl       CDL    CDL   CDL
///   FiveGOnlyCdl     CDL    -     -
///   WifiOnlyTdl      -      TDL   -
///   DecoupledCdlTdl  CDL    TDL   -
constexpr Transform select_transform(AugmentationPolicy policy, WaveformKind kind) noexcept {
  switch (policy) {
    case AugmentationPolicy::NoAug: return Transform::Passthrough;
    case AugmentationPolicy::UniformTdl: return Transform::Tdl;
    case AugmentationPolicy::UniformCdl: return Transform::Cdl;
    case AugmentationPolicy::FiveGOnlyCdl:
      return kind == WaveformKind::FiveG ? Transform::Cdl : Transform::Passthrough;
    case AugmentationPolicy::WifiOnlyTdl:
      return kind == WaveformKind::Wifi ? Transform::Tdl : Transform::Passthrough;
    case AugmentationPolicy::DecoupledCdlTdl:
      if (kind == WaveformKind::FiveG) return Transform::Cdl;
      if (kind == WaveformKind::Wifi) return Transform::Tdl;
      return Transform::Passthrough;
  }
  return Transform::Passthrough;
}

struct AugmentationPlan {
  AugmentationPolicy policy = AugmentationPolicy::DecoupledCdlTdl;
  std::size_t copies_per_example = 4;
  std::vector<ProfileId> tdl_ids{ProfileId::A, ProfileId::B, ProfileId::C};
  std::vector<ProfileId> cdl_ids{ProfileId::A, ProfileId::B, ProfileId::C};
  std::pair<double, double> ds_range_s{30e-9, 300e-9};
  std::pair<double, double> doppler_range_hz{0.0, 10.0};
  std::pair<double, double> snr_range_db{10.0, 25.0};
  std::uint64_t master_seed = 1;

  /// Throws Config on empty copy count, inverted ranges, or an empty id set
  /// the policy can route to.
  void validate() const;
};

/// Reads the `[plan]` section; missing keys keep the defaults above.
AugmentationPlan plan_from_config(const KvConfig& cfg, const std::string& section = "plan");
void plan_to_config(const AugmentationPlan& plan, KvConfig& cfg, const std::string& section = "plan");
AugmentationPlan load_plan(const std::filesystem::path& path);
void save_plan(const AugmentationPlan& plan, const std::filesystem::path& path);

/// Parameters of one augmented copy, reproducible from `seed`.
struct ChannelDraw {
  ChannelFamily family = ChannelFamily::Tdl;
  ProfileId profile = ProfileId::A;
  ChannelConfig config;
};

struct AugmentedRecording {
  IqBuffer buffer;
  RecordingMeta meta;
  ChannelDraw draw;
};

std::uint64_t copy_seed(std::uint64_t master_seed, std::uint64_t item_index, std::size_t copy);

ChannelDraw draw_channel(const AugmentationPlan& plan, Transform transform, double sample_rate_hz,
                         std::uint64_t seed);

/// Passthrough yields an empty list. Otherwise one independently seeded
/// channel draw plus AWGN per copy; labels are carried over unchanged.
std::vector<AugmentedRecording> augment_recording(const IqBuffer& x, const RecordingMeta& meta,
                                                  const AugmentationPlan& plan, std::uint64_t item_index);

/// Expands a Day-1 manifest: every original followed by its augmented copies,
/// in input order. Copies are written under `out_dir/aug/`; returned paths
/// are relative to `out_dir`.
DatasetManifest augment_dataset(const DatasetManifest& manifest, const std::filesystem::path& manifest_dir,
                                const AugmentationPlan& plan, const std::filesystem::path& out_dir);

}  // namespace rfaug
