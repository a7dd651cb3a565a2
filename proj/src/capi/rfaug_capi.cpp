#include "rfaug/rfaug.h"

#include <cstring>
#include <exception>
#include <new>
#include <optional>
#include <string>

#include "rfaug/augment.hpp"
#include "rfaug/channel.hpp"
#include "rfaug/classifier.hpp"
#include "rfaug/error.hpp"
#include "rfaug/experiment.hpp"
#include "rfaug/impairments.hpp"
#include "rfaug/manifest.hpp"
#include "rfaug/wavegen.hpp"

struct rfaug_buffer {
  rfaug::IqBuffer iq;
};

struct rfaug_model {
  rfaug::Network net;
};

namespace {

thread_local std::string g_last_error;

rfaug_status status_of(rfaug::ErrorKind kind) {
  using rfaug::ErrorKind;
  switch (kind) {
    case ErrorKind::Io: return RFAUG_ERR_IO;
    case ErrorKind::Format: return RFAUG_ERR_FORMAT;
    case ErrorKind::Parse: return RFAUG_ERR_PARSE;
    case ErrorKind::Validation: return RFAUG_ERR_VALIDATION;
    case ErrorKind::Config: return RFAUG_ERR_CONFIG;
    case ErrorKind::Degenerate: return RFAUG_ERR_DEGENERATE;
    case ErrorKind::InvalidArgument: return RFAUG_ERR_INVALID_ARGUMENT;
  }
  return RFAUG_ERR_INTERNAL;
}

template <typename F>
rfaug_status guarded(F&& body) {
  g_last_error.clear();
  try {
    body();
    return RFAUG_OK;
  } catch (const rfaug::Error& e) {
    g_last_error = e.what();
    return status_of(e.kind());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
  } catch (const std::exception& e) {
    g_last_error = e.what();
  } catch (...) {
    g_last_error = "unknown error";
  }
  return RFAUG_ERR_INTERNAL;
}

void require(bool ok, const char* what) {
  if (!ok) rfaug::fail(rfaug::ErrorKind::InvalidArgument, what);
}

rfaug::WaveformKind waveform_of(rfaug_waveform kind) {
  require(kind >= RFAUG_WAVEFORM_5G && kind <= RFAUG_WAVEFORM_LTE, "unknown waveform kind");
  return static_cast<rfaug::WaveformKind>(kind);
}

rfaug::IqBuffer from_interleaved(const float* iq, std::size_t n, double fs) {
  require(iq != nullptr || n == 0, "null sample pointer");
  std::vector<rfaug::Sample> samples(n);
  for (std::size_t k = 0; k < n; ++k) samples[k] = {iq[2 * k], iq[2 * k + 1]};
  return rfaug::IqBuffer(std::move(samples), fs);
}

rfaug::KvConfig config_or_empty(const char* path) { return path ? rfaug::KvConfig::load(path) : rfaug::KvConfig{}; }

rfaug_buffer* wrap(rfaug::IqBuffer b) { return new rfaug_buffer{std::move(b)}; }

}  // namespace

extern "C" {

const char* rfaug_version(void) { return "0.1.0"; }

const char* rfaug_last_error(void) { return g_last_error.c_str(); }

const char* rfaug_status_name(rfaug_status status) {
  switch (status) {
    case RFAUG_OK: return "ok";
    case RFAUG_ERR_IO: return "io";
    case RFAUG_ERR_FORMAT: return "format";
    case RFAUG_ERR_PARSE: return "parse";
    case RFAUG_ERR_VALIDATION: return "validation";
    case RFAUG_ERR_CONFIG: return "config";
    case RFAUG_ERR_DEGENERATE: return "degenerate";
    case RFAUG_ERR_INVALID_ARGUMENT: return "invalid-argument";
    case RFAUG_ERR_INTERNAL: return "internal";
  }
  return "unknown";
}

rfaug_status rfaug_buffer_create(const float* iq, size_t num_samples, double sample_rate_hz, rfaug_buffer** out) {
  return guarded([&] {
    require(out != nullptr, "null output handle");
    *out = wrap(from_interleaved(iq, num_samples, sample_rate_hz));
  });
}

rfaug_status rfaug_buffer_read(const char* path, double sample_rate_hz, rfaug_buffer** out) {
  return guarded([&] {
    require(path && out, "null argument");
    *out = wrap(rfaug::read_iq_bin(path, sample_rate_hz));
  });
}

rfaug_status rfaug_buffer_write(const rfaug_buffer* buffer, const char* path) {
  return guarded([&] {
    require(buffer && path, "null argument");
    rfaug::write_iq_bin(buffer->iq, path);
  });
}

size_t rfaug_buffer_size(const rfaug_buffer* buffer) { return buffer ? buffer->iq.size() : 0; }

double rfaug_buffer_sample_rate(const rfaug_buffer* buffer) { return buffer ? buffer->iq.sample_rate_hz() : 0.0; }

rfaug_status rfaug_buffer_copy(const rfaug_buffer* buffer, float* iq, size_t capacity) {
  return guarded([&] {
    require(buffer != nullptr, "null buffer");
    require(iq != nullptr || capacity == 0, "null destination");
    const auto s = buffer->iq.samples();
    const std::size_t n = std::min(capacity, s.size());
    for (std::size_t k = 0; k < n; ++k) {
      iq[2 * k] = static_cast<float>(s[k].real());
      iq[2 * k + 1] = static_cast<float>(s[k].imag());
    }
  });
}

void rfaug_buffer_free(rfaug_buffer* buffer) { delete buffer; }

rfaug_status rfaug_gen_burst(rfaug_waveform kind, size_t num_symbols, uint64_t payload_seed, double sample_rate_hz,
                             rfaug_buffer** out) {
  return guarded([&] {
    require(out != nullptr, "null output handle");
    *out = wrap(rfaug::gen_burst(rfaug::default_spec(waveform_of(kind)), num_symbols, payload_seed, sample_rate_hz));
  });
}

void rfaug_fingerprint_init(rfaug_fingerprint* fp) {
  if (!fp) return;
  *fp = rfaug_fingerprint{};
  fp->iq_gain = 1.0;
  fp->pa_a1_re = 1.0;
}

rfaug_status rfaug_apply_fingerprint(const rfaug_buffer* in, const rfaug_fingerprint* fp, uint64_t seed,
                                     rfaug_buffer** out) {
  return guarded([&] {
    require(in && fp && out, "null argument");
    rfaug::TransmitterFingerprint f;
    f.iq_gain = fp->iq_gain;
    f.iq_phase_deg = fp->iq_phase_deg;
    f.dc_offset = {fp->dc_re, fp->dc_im};
    f.pa_a1 = {fp->pa_a1_re, fp->pa_a1_im};
    f.pa_a3 = {fp->pa_a3_re, fp->pa_a3_im};
    f.pa_a5 = {fp->pa_a5_re, fp->pa_a5_im};
    f.cfo_hz = fp->cfo_hz;
    f.phase_noise_std = fp->phase_noise_std;
    *out = wrap(rfaug::apply_fingerprint(in->iq, f, seed));
  });
}

rfaug_status rfaug_apply_channel(const rfaug_buffer* in, const rfaug_channel_params* params, rfaug_buffer** out) {
  return guarded([&] {
    require(in && params && out, "null argument");
    require(params->family == RFAUG_FAMILY_TDL || params->family == RFAUG_FAMILY_CDL, "unknown channel family");
    require(params->profile >= 0 && params->profile <= 4, "profile must be 0..4 (A..E)");
    rfaug::ChannelConfig c;
    c.delay_spread_s = params->delay_spread_s;
    c.max_doppler_hz = params->max_doppler_hz;
    c.sample_rate_hz = in->iq.sample_rate_hz();
    if (params->add_noise) c.snr_db = params->snr_db;
    c.seed = params->seed;
    const auto family = params->family == RFAUG_FAMILY_CDL ? rfaug::ChannelFamily::Cdl : rfaug::ChannelFamily::Tdl;
    *out = wrap(rfaug::apply_channel_draw(in->iq, family, static_cast<rfaug::ProfileId>(params->profile), c));
  });
}

rfaug_status rfaug_add_awgn(const rfaug_buffer* in, double snr_db, uint64_t seed, rfaug_buffer** out) {
  return guarded([&] {
    require(in && out, "null argument");
    *out = wrap(rfaug::add_awgn(in->iq, snr_db, seed));
  });
}

rfaug_transform rfaug_select_transform(rfaug_policy policy, rfaug_waveform kind) {
  if (policy < RFAUG_POLICY_NOAUG || policy > RFAUG_POLICY_DECOUPLED_CDL_TDL) return RFAUG_TRANSFORM_PASSTHROUGH;
  if (kind < RFAUG_WAVEFORM_5G || kind > RFAUG_WAVEFORM_LTE) return RFAUG_TRANSFORM_PASSTHROUGH;
  switch (rfaug::select_transform(static_cast<rfaug::AugmentationPolicy>(policy),
                                  static_cast<rfaug::WaveformKind>(kind))) {
    case rfaug::Transform::Cdl: return RFAUG_TRANSFORM_CDL;
    case rfaug::Transform::Tdl: return RFAUG_TRANSFORM_TDL;
    case rfaug::Transform::Passthrough: return RFAUG_TRANSFORM_PASSTHROUGH;
  }
  return RFAUG_TRANSFORM_PASSTHROUGH;
}

rfaug_status rfaug_synth(const char* config_path, const uint64_t* seed, const char* out_dir) {
  return guarded([&] {
    require(out_dir != nullptr, "null output directory");
    const rfaug::ExperimentConfig cfg =
        config_path ? rfaug::load_experiment_config(config_path) : rfaug::ExperimentConfig{};
    rfaug::synth_dataset(cfg, seed ? *seed : cfg.seeds.front(), out_dir);
  });
}

rfaug_status rfaug_augment(const char* manifest_path, const char* plan_path, const char* policy, const uint64_t* seed,
                           const char* out_dir) {
  return guarded([&] {
    require(manifest_path && out_dir, "null argument");
    const std::filesystem::path mpath = manifest_path;
    const auto manifest = rfaug::read_manifest(mpath);
    rfaug::AugmentationPlan plan = plan_path ? rfaug::load_plan(plan_path) : rfaug::AugmentationPlan{};
    if (policy) plan.policy = rfaug::parse_policy(policy);
    if (seed) plan.master_seed = *seed;
    const auto expanded = rfaug::augment_dataset(manifest, mpath.parent_path(), plan, out_dir);
    rfaug::write_manifest(expanded, std::filesystem::path(out_dir) / "manifest.csv");
  });
}

rfaug_status rfaug_model_train(const char* manifest_path, const char* config_path, const uint64_t* seed,
                               rfaug_epoch_fn on_epoch, void* user, rfaug_model** out) {
  return guarded([&] {
    require(manifest_path && out, "null argument");
    const std::filesystem::path mpath = manifest_path;
    const auto manifest = rfaug::read_manifest(mpath);
    rfaug::KvConfig cfg = config_or_empty(config_path);
    if (!cfg.has("net.window_len")) {
      cfg.set("net.window_len", static_cast<std::int64_t>(manifest.header.window_len));
    }
    if (!cfg.has("net.num_classes")) cfg.set("net.num_classes", std::int64_t{manifest.header.num_transmitters});
    rfaug::NetConfig net = rfaug::net_config_from(cfg);
    if (seed) net.seed = *seed;
    const auto stride = cfg.get_int("train.stride", static_cast<std::int64_t>(net.window_len));
    require(stride >= 1, "train.stride must be >= 1");
    const auto examples =
        rfaug::load_windows(manifest, mpath.parent_path(), net.window_len, static_cast<std::size_t>(stride));
    auto model = rfaug::train(examples, net);
    if (on_epoch) {
      for (const auto& e : model.log) {
        const rfaug_epoch_stats stats{e.epoch, e.mean_loss, e.accuracy};
        on_epoch(&stats, user);
      }
    }
    *out = new rfaug_model{std::move(model.network)};
  });
}

rfaug_status rfaug_model_load(const char* path, rfaug_model** out) {
  return guarded([&] {
    require(path && out, "null argument");
    *out = new rfaug_model{rfaug::load_model(path)};
  });
}

rfaug_status rfaug_model_save(const rfaug_model* model, const char* path) {
  return guarded([&] {
    require(model && path, "null argument");
    rfaug::save_model(model->net, path);
  });
}

size_t rfaug_model_num_classes(const rfaug_model* model) { return model ? model->net.config().num_classes : 0; }

size_t rfaug_model_window_len(const rfaug_model* model) { return model ? model->net.config().window_len : 0; }

void rfaug_model_free(rfaug_model* model) { delete model; }

rfaug_status rfaug_model_predict(const rfaug_model* model, const float* iq, size_t num_samples, double* probs,
                                 size_t capacity) {
  return guarded([&] {
    require(model && iq && probs, "null argument");
    const auto& cfg = model->net.config();
    require(capacity >= cfg.num_classes, "probability buffer smaller than the class count");
    const auto window = from_interleaved(iq, num_samples, 1.0);
    const auto p = model->net.probabilities(window.samples());
    std::copy(p.begin(), p.end(), probs);
  });
}

rfaug_status rfaug_model_evaluate(const rfaug_model* model, const char* manifest_path, double* accuracy,
                                  size_t* total, size_t* confusion) {
  return guarded([&] {
    require(model && manifest_path, "null argument");
    const std::filesystem::path mpath = manifest_path;
    const auto manifest = rfaug::read_manifest(mpath);
    const std::size_t w = model->net.config().window_len;
    const auto examples = rfaug::load_windows(manifest, mpath.parent_path(), w, w);
    const auto report = rfaug::evaluate(model->net, examples);
    if (accuracy) *accuracy = report.accuracy;
    if (total) *total = report.total;
    if (confusion) {
      const std::size_t n = report.confusion.size();
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) confusion[i * n + j] = report.confusion[i][j];
      }
    }
  });
}

rfaug_status rfaug_model_export_features(const rfaug_model* model, const char* manifest_path, const char* csv_path) {
  return guarded([&] {
    require(model && manifest_path && csv_path, "null argument");
    const std::filesystem::path mpath = manifest_path;
    const auto manifest = rfaug::read_manifest(mpath);
    const std::size_t w = model->net.config().window_len;
    rfaug::export_features(model->net, rfaug::load_windows(manifest, mpath.parent_path(), w, w), csv_path);
  });
}

rfaug_status rfaug_experiment_run(const char* config_path, const uint64_t* seeds, size_t num_seeds,
                                  const char* out_dir, rfaug_progress_fn progress, void* user,
                                  rfaug_result_row* rows, size_t capacity, size_t* num_rows) {
  return guarded([&] {
    require(seeds != nullptr || num_seeds == 0, "null seed list");
    require(rows != nullptr || capacity == 0, "null row buffer");
    rfaug::ExperimentConfig cfg =
        config_path ? rfaug::load_experiment_config(config_path) : rfaug::ExperimentConfig{};
    if (num_seeds > 0) cfg.seeds.assign(seeds, seeds + num_seeds);
    if (out_dir) cfg.out_dir = out_dir;
    rfaug::ProgressFn fn;
    if (progress) fn = [&](const std::string& msg) { progress(msg.c_str(), user); };
    const auto table = rfaug::run_experiment(cfg, fn);
    for (std::size_t i = 0; i < table.rows.size() && i < capacity; ++i) {
      rows[i] = {static_cast<rfaug_policy>(table.rows[i].policy), table.rows[i].day1_acc, table.rows[i].day2_acc};
    }
    if (num_rows) *num_rows = table.rows.size();
  });
}

}  // extern "C"
