/* C interface to the rfaug toolkit.
 *
 * Every fallible call returns an rfaug_status; on failure a description is
 * available from rfaug_last_error() until the next call on the same thread.
 * Objects are opaque handles released with their *_free function. Output
 * handles are only written on success.
 */
#ifndef RFAUG_H
#define RFAUG_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(RFAUG_BUILDING_LIBRARY)
#define RFAUG_API __attribute__((visibility("default")))
#else
#define RFAUG_API
#endif

typedef enum rfaug_status {
  RFAUG_OK = 0,
  RFAUG_ERR_IO = 1,
  RFAUG_ERR_FORMAT = 2,
  RFAUG_ERR_PARSE = 3,
  RFAUG_ERR_VALIDATION = 4,
  RFAUG_ERR_CONFIG = 5,
  RFAUG_ERR_DEGENERATE = 6,
  RFAUG_ERR_INVALID_ARGUMENT = 7,
  RFAUG_ERR_INTERNAL = 8
} rfaug_status;

typedef enum rfaug_waveform { RFAUG_WAVEFORM_5G = 0, RFAUG_WAVEFORM_WIFI = 1, RFAUG_WAVEFORM_LTE = 2 } rfaug_waveform;

typedef enum rfaug_policy {
  RFAUG_POLICY_NOAUG = 0,
  RFAUG_POLICY_UNIFORM_TDL = 1,
  RFAUG_POLICY_UNIFORM_CDL = 2,
  RFAUG_POLICY_5G_ONLY_CDL = 3,
  RFAUG_POLICY_WIFI_ONLY_TDL = 4,
  RFAUG_POLICY_DECOUPLED_CDL_TDL = 5
} rfaug_policy;

typedef enum rfaug_transform { RFAUG_TRANSFORM_CDL = 0, RFAUG_TRANSFORM_TDL = 1, RFAUG_TRANSFORM_PASSTHROUGH = 2 } rfaug_transform;

typedef enum rfaug_family { RFAUG_FAMILY_TDL = 0, RFAUG_FAMILY_CDL = 1 } rfaug_family;

RFAUG_API const char* rfaug_version(void);
RFAUG_API const char* rfaug_last_error(void);
RFAUG_API const char* rfaug_status_name(rfaug_status status);

/* ---- I/Q buffers ---- */

typedef struct rfaug_buffer rfaug_buffer;

/* `iq` holds num_samples interleaved (I, Q) pairs. */
RFAUG_API rfaug_status rfaug_buffer_create(const float* iq, size_t num_samples, double sample_rate_hz,
                                           rfaug_buffer** out);
RFAUG_API rfaug_status rfaug_buffer_read(const char* path, double sample_rate_hz, rfaug_buffer** out);
RFAUG_API rfaug_status rfaug_buffer_write(const rfaug_buffer* buffer, const char* path);
RFAUG_API size_t rfaug_buffer_size(const rfaug_buffer* buffer);
RFAUG_API double rfaug_buffer_sample_rate(const rfaug_buffer* buffer);
/* Copies min(capacity, size) samples as interleaved floats. */
RFAUG_API rfaug_status rfaug_buffer_copy(const rfaug_buffer* buffer, float* iq, size_t capacity);
RFAUG_API void rfaug_buffer_free(rfaug_buffer* buffer);

/* ---- signal generation and transforms ---- */

RFAUG_API rfaug_status rfaug_gen_burst(rfaug_waveform kind, size_t num_symbols, uint64_t payload_seed,
                                       double sample_rate_hz, rfaug_buffer** out);

typedef struct rfaug_fingerprint {
  double iq_gain;
  double iq_phase_deg;
  double dc_re, dc_im;
  double pa_a1_re, pa_a1_im;
  double pa_a3_re, pa_a3_im;
  double pa_a5_re, pa_a5_im;
  double cfo_hz;
  double phase_noise_std;
} rfaug_fingerprint;

/* Fills the ideal transmitter (unit gain, no offsets). */
RFAUG_API void rfaug_fingerprint_init(rfaug_fingerprint* fp);
RFAUG_API rfaug_status rfaug_apply_fingerprint(const rfaug_buffer* in, const rfaug_fingerprint* fp, uint64_t seed,
                                               rfaug_buffer** out);

typedef struct rfaug_channel_params {
  rfaug_family family;
  int profile; /* 0..4 for A..E */
  double delay_spread_s;
  double max_doppler_hz;
  int add_noise; /* nonzero: AWGN at snr_db after the channel */
  double snr_db;
  uint64_t seed;
} rfaug_channel_params;

RFAUG_API rfaug_status rfaug_apply_channel(const rfaug_buffer* in, const rfaug_channel_params* params,
                                           rfaug_buffer** out);
RFAUG_API rfaug_status rfaug_add_awgn(const rfaug_buffer* in, double snr_db, uint64_t seed, rfaug_buffer** out);

RFAUG_API rfaug_transform rfaug_select_transform(rfaug_policy policy, rfaug_waveform kind);

/* ---- dataset stages; `seed` arguments are optional overrides (NULL keeps the config value) ---- */

/* Writes out_dir/day1, out_dir/day2 and their manifests. config_path may be NULL for defaults. */
RFAUG_API rfaug_status rfaug_synth(const char* config_path, const uint64_t* seed, const char* out_dir);

/* Augments a Day-1 manifest into out_dir; writes out_dir/manifest.csv. policy may be NULL to keep the plan's. */
RFAUG_API rfaug_status rfaug_augment(const char* manifest_path, const char* plan_path, const char* policy,
                                     const uint64_t* seed, const char* out_dir);

/* ---- classifier ---- */

typedef struct rfaug_model rfaug_model;

typedef struct rfaug_epoch_stats {
  size_t epoch;
  double mean_loss;
  double accuracy;
} rfaug_epoch_stats;

typedef void (*rfaug_epoch_fn)(const rfaug_epoch_stats* stats, void* user);

/* Trains on every window of the manifest. The network shape comes from the
 * [net] section of config_path (NULL for defaults); window length and class
 * count default to the manifest header. */
RFAUG_API rfaug_status rfaug_model_train(const char* manifest_path, const char* config_path, const uint64_t* seed,
                                         rfaug_epoch_fn on_epoch, void* user, rfaug_model** out);
RFAUG_API rfaug_status rfaug_model_load(const char* path, rfaug_model** out);
RFAUG_API rfaug_status rfaug_model_save(const rfaug_model* model, const char* path);
RFAUG_API size_t rfaug_model_num_classes(const rfaug_model* model);
RFAUG_API size_t rfaug_model_window_len(const rfaug_model* model);
RFAUG_API void rfaug_model_free(rfaug_model* model);

/* Class probabilities for one window of rfaug_model_window_len samples. */
RFAUG_API rfaug_status rfaug_model_predict(const rfaug_model* model, const float* iq, size_t num_samples,
                                           double* probs, size_t capacity);

/* `confusion` may be NULL; otherwise it must hold num_classes^2 entries. */
RFAUG_API rfaug_status rfaug_model_evaluate(const rfaug_model* model, const char* manifest_path, double* accuracy,
                                            size_t* total, size_t* confusion);
RFAUG_API rfaug_status rfaug_model_export_features(const rfaug_model* model, const char* manifest_path,
                                                   const char* csv_path);

/* ---- full experiment ---- */

typedef struct rfaug_result_row {
  rfaug_policy policy;
  double day1_acc;
  double day2_acc;
} rfaug_result_row;

typedef void (*rfaug_progress_fn)(const char* message, void* user);

/* Runs every seed and policy, writing results under the output directory.
 * seeds/num_seeds override the config's seed list when num_seeds > 0;
 * out_dir overrides it when non-NULL. Up to `capacity` mean rows are copied
 * into `rows`; *num_rows receives the row count. */
RFAUG_API rfaug_status rfaug_experiment_run(const char* config_path, const uint64_t* seeds, size_t num_seeds,
                                            const char* out_dir, rfaug_progress_fn progress, void* user,
                                            rfaug_result_row* rows, size_t capacity, size_t* num_rows);

#ifdef __cplusplus
}
#endif

#endif
