#include <algorithm>
#include <cmath>
#include <numeric>

#include "rfaug/channel.hpp"
#include "rfaug/error.hpp"

namespace rfaug {

namespace {

struct Row {
  double delay;
  double power_db;
  double aoa_deg;
};

// A LOS table lists the specular path and the diffuse part of cluster 1 as
// two rows at delay 0; they are merged into tap 0 with K = los_db - diffuse_db.
struct RawTable {
  const char* name;
  std::vector<Row> rows;
  std::optional<Row> los_row;
};

// Normalized delay, power (dB), AoA (deg). TDL tables reuse the CDL delay and
// power columns, which are identical in TR 38.901 Rel-15.
RawTable table_a() {
  return {"A",
          {{0.0000, -13.4, 51.3},  {0.3819, 0.0, -152.7},   {0.4025, -2.2, -152.7},
           {0.5868, -4.0, -152.7}, {0.4610, -6.0, 76.6},    {0.5375, -8.2, 76.6},
           {0.6708, -9.9, 76.6},   {0.5750, -10.5, -1.8},   {0.7618, -7.5, -41.9},
           {1.5375, -15.9, 94.2},  {1.8978, -6.6, 51.9},    {2.2242, -16.7, -115.9},
           {2.1718, -12.4, 26.6},  {2.4942, -15.2, 76.6},   {2.5119, -10.8, -7.0},
           {3.0582, -11.3, -23.0}, {4.0810, -12.7, -47.2},  {4.4579, -16.2, 110.4},
           {4.5695, -18.3, 144.5}, {4.7966, -18.9, 155.3},  {5.0066, -16.6, 102.0},
           {5.3043, -19.9, -151.8}, {9.6586, -29.7, 55.2}},
          std::nullopt};
}

RawTable table_b() {
  return {"B",
          {{0.0000, 0.0, -173.3},  {0.1072, -2.2, -173.3}, {0.2155, -4.0, -173.3},
           {0.2095, -3.2, 125.5},  {0.2870, -9.8, -88.0},  {0.2986, -1.2, 155.1},
           {0.3752, -3.4, 155.1},  {0.5055, -5.2, 155.1},  {0.3681, -7.6, -89.8},
           {0.3697, -3.0, 132.1},  {0.5700, -8.9, -83.6},  {0.5283, -9.0, 95.3},
           {1.1021, -4.8, 103.7},  {1.2756, -5.7, -87.8},  {1.5474, -7.5, -92.5},
           {1.7842, -1.9, -139.1}, {2.0169, -7.6, -90.6},  {2.8294, -12.2, 58.6},
           {3.0219, -9.8, -79.0},  {3.6187, -11.4, 65.8},  {4.1067, -14.9, 52.7},
           {4.2790, -9.2, 88.7},   {4.7834, -11.3, -60.4}},
          std::nullopt};
}

RawTable table_c() {
  return {"C",
          {{0.0000, -4.4, -101.0}, {0.2099, -1.2, 120.0},  {0.2219, -3.5, 120.0},
           {0.2329, -5.2, 120.0},  {0.2176, -2.5, -127.5}, {0.6366, 0.0, 170.4},
           {0.6448, -2.2, 170.4},  {0.6560, -3.9, 170.4},  {0.6584, -7.4, 55.4},
           {0.7935, -7.1, 66.5},   {0.8213, -10.7, -48.1}, {0.9336, -11.1, 46.9},
           {1.2285, -5.1, 68.1},   {1.3083, -6.8, -68.7},  {2.1704, -8.7, 81.5},
           {2.7105, -13.2, 30.7},  {4.2589, -13.9, -16.4}, {4.6003, -13.9, 3.8},
           {5.4902, -15.8, -13.7}, {5.6077, -17.1, 9.7},   {6.3065, -16.0, 5.6},
           {6.6374, -15.7, 0.7},   {7.0427, -21.6, -21.9}, {8.6523, -22.8, 33.6}},
          std::nullopt};
}

RawTable table_d() {
  return {"D",
          {{0.0000, -13.5, -180.0}, {0.0350, -18.8, 89.2},  {0.6120, -21.0, 89.2},
           {1.3630, -22.8, 89.2},   {1.4050, -17.9, 163.0}, {1.8040, -20.1, 163.0},
           {2.5960, -21.9, 163.0},  {1.7750, -22.9, -137.0}, {4.0420, -27.8, 74.5},
           {7.9370, -23.6, 127.7},  {9.4240, -24.8, -119.6}, {9.7080, -30.0, -9.1},
           {12.5250, -27.7, -83.8}},
          Row{0.0, -0.2, -180.0}};
}

RawTable table_e() {
  return {"E",
          {{0.0000, -22.03, -180.0}, {0.5133, -15.8, 18.2},  {0.5440, -18.1, 18.2},
           {0.5630, -19.8, 18.2},    {0.5440, -22.9, 101.8}, {0.7112, -22.4, 112.9},
           {1.9092, -18.6, -155.5},  {1.9293, -20.8, -155.5}, {1.9589, -22.6, -155.5},
           {2.6426, -22.3, -143.3},  {3.7136, -25.6, -94.7},  {5.4524, -20.2, 147.0},
           {12.0034, -29.8, -36.2},  {20.6519, -29.2, -26.0}},
          Row{0.0, -0.03, -180.0}};
}

RawTable raw_table(ProfileId id) {
  switch (id) {
    case ProfileId::A: return table_a();
    case ProfileId::B: return table_b();
    case ProfileId::C: return table_c();
    case ProfileId::D: return table_d();
    case ProfileId::E: return table_e();
  }
  return table_a();
}

ClusterProfile build(ProfileId id, const char* prefix) {
  RawTable raw = raw_table(id);
  std::stable_sort(raw.rows.begin(), raw.rows.end(),
                   [](const Row& a, const Row& b) { return a.delay < b.delay; });

  ClusterProfile out;
  out.taps.name = std::string(prefix) + "-" + raw.name;
  for (const auto& r : raw.rows) {
    out.taps.delays.push_back(r.delay);
    out.taps.powers_db.push_back(r.power_db);
    out.aoa_deg.push_back(r.aoa_deg);
  }
  if (raw.los_row) {
    const double diffuse_db = out.taps.powers_db.front();
    const double los_db = raw.los_row->power_db;
    out.taps.los = true;
    out.taps.rician_k_db = los_db - diffuse_db;
    out.taps.powers_db.front() =
        10.0 * std::log10(std::pow(10.0, los_db / 10.0) + std::pow(10.0, diffuse_db / 10.0));
  }
  return out;
}

}  // namespace

std::string_view to_string(ProfileId id) {
  constexpr std::string_view names[] = {"A", "B", "C", "D", "E"};
  return names[static_cast<int>(id)];
}

ProfileId parse_profile_id(std::string_view text) {
  if (text.size() == 1 && text[0] >= 'A' && text[0] <= 'E') {
    return static_cast<ProfileId>(text[0] - 'A');
  }
  fail(ErrorKind::Parse, "unknown profile id '" + std::string(text) + "' (expected A..E)");
}

std::string_view to_string(ChannelFamily family) {
  return family == ChannelFamily::Tdl ? "TDL" : "CDL";
}

void TapProfile::validate() const {
  if (delays.empty()) fail(ErrorKind::Validation, name + ": profile has no taps");
  if (delays.size() != powers_db.size()) {
    fail(ErrorKind::Validation, name + ": delay and power vectors differ in length");
  }
  if (delays.front() != 0.0) fail(ErrorKind::Validation, name + ": first delay must be 0");
  if (!std::is_sorted(delays.begin(), delays.end())) {
    fail(ErrorKind::Validation, name + ": delays must be ascending");
  }
  for (std::size_t n = 0; n < delays.size(); ++n) {
    if (!std::isfinite(delays[n]) || !std::isfinite(powers_db[n])) {
      fail(ErrorKind::Validation, name + ": non-finite tap");
    }
  }
  if (los && !rician_k_db) fail(ErrorKind::Validation, name + ": LOS profile without K-factor");
}

void ClusterProfile::validate() const {
  taps.validate();
  if (aoa_deg.size() != taps.size()) {
    fail(ErrorKind::Validation, taps.name + ": AoA vector length differs from delay vector");
  }
}

TapProfile tdl_profile(ProfileId id) {
  ClusterProfile c = build(id, "TDL");
  return std::move(c.taps);
}

ClusterProfile cdl_profile(ProfileId id) { return build(id, "CDL"); }

double rms_delay_spread(const TapProfile& profile) {
  double total = 0.0;
  double mean = 0.0;
  double second = 0.0;
  for (std::size_t n = 0; n < profile.size(); ++n) {
    const double p = std::pow(10.0, profile.powers_db[n] / 10.0);
    total += p;
    mean += p * profile.delays[n];
    second += p * profile.delays[n] * profile.delays[n];
  }
  mean /= total;
  second /= total;
  return std::sqrt(std::max(0.0, second - mean * mean));
}

TapProfile scale_delays(const TapProfile& profile, double target_rms_ds_s) {
  if (!(target_rms_ds_s >= 0.0) || !std::isfinite(target_rms_ds_s)) {
    fail(ErrorKind::InvalidArgument, "target RMS delay spread must be finite and >= 0");
  }
  profile.validate();
  TapProfile out = profile;
  out.unit = DelayUnit::Seconds;
  const double current = rms_delay_spread(profile);
  // A profile with no spread (single tap) cannot be stretched; it stays flat.
  const double factor = (target_rms_ds_s == 0.0 || current == 0.0) ? 0.0 : target_rms_ds_s / current;
  for (auto& d : out.delays) d *= factor;
  return out;
}

ClusterProfile scale_delays(const ClusterProfile& profile, double target_rms_ds_s) {
  profile.validate();
  return {scale_delays(profile.taps, target_rms_ds_s), profile.aoa_deg};
}

}  // namespace rfaug
