#ifndef SUSPLAB_H
#define SUSPLAB_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum SlMode {
  SL_MODE_ACTIVE = 0,
  SL_MODE_SEMI_ACTIVE_ZERO = 1,
  SL_MODE_SEMI_ACTIVE_FUZZY_PID = 2,
} SlMode;

typedef enum SlStatus {
  SL_STATUS_OK = 0,
  SL_STATUS_NULL_POINTER = 1,
  SL_STATUS_INVALID_PARAMETER = 2,
  SL_STATUS_NUMERIC = 3,
  SL_STATUS_IO = 4,
  SL_STATUS_OUT_OF_RANGE = 5,
  SL_STATUS_PANIC = 6,
} SlStatus;

/**
 * Fuzzy controller handle.
 */
typedef struct SlFuzzy SlFuzzy;

/**
 * Road profile handle.
 */
typedef struct SlRoad SlRoad;

/**
 * Simulation result handle.
 */
typedef struct SlTimeSeries SlTimeSeries;

/**
 * Numeric plant parameters; sign convention and spring form keep their defaults.
 */
typedef struct SlPlantParams {
  double m_s;
  double m_u;
  double g;
  double k11;
  double k12;
  double k13;
  double k21;
  double k22;
  double c_o;
  double c_s;
  double c_i;
  double k_s;
  double k_m;
  double f_min;
  double f_max;
  double b_s;
  double b_u;
} SlPlantParams;

typedef struct SlMetrics {
  double peak_accel;
  double rms_accel;
  double peak_distortion;
  double rms_distortion;
  double tire_load_min;
  double tire_load_max;
} SlMetrics;

/**
 * Objective callback: returns the score for gains (kp, ki, kd). Calls are serialized.
 */
typedef double (*SlObjective)(void *user_data, double kp, double ki, double kd);

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or NULL. Valid until the next call.
 */
const char *sl_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *sl_version(void);

/**
 * # Safety
 * `out` must be NULL or point to writable memory for one `SlPlantParams`.
 */
enum SlStatus sl_plant_params_default(struct SlPlantParams *out);

/**
 * Fuzzy controller with the default rule table, output clamped to `[f_min, f_max]`.
 *
 * # Safety
 * `out` must be NULL or a valid pointer to a handle slot.
 */
enum SlStatus sl_fuzzy_new(double f_min, double f_max, struct SlFuzzy **out);

/**
 * # Safety
 * `h` must be a live handle; `out` must be writable.
 */
enum SlStatus sl_fuzzy_infer(const struct SlFuzzy *h,
                             double velocity,
                             double acceleration,
                             double distortion,
                             double *out);

/**
 * # Safety
 * `h` must be NULL or a handle from `sl_fuzzy_new` not yet freed.
 */
void sl_fuzzy_free(struct SlFuzzy *h);

/**
 * Random road with the default spectrum and the given seed.
 *
 * # Safety
 * `out` must be a valid pointer to a handle slot.
 */
enum SlStatus sl_road_generate(uint64_t seed,
                               double velocity,
                               double dt,
                               double duration,
                               struct SlRoad **out);

/**
 * Road from uniformly spaced elevation samples (copied).
 *
 * # Safety
 * `samples` must point to `len` readable doubles; `out` must be a valid handle slot.
 */
enum SlStatus sl_road_from_samples(double dt,
                                   const double *samples,
                                   size_t len,
                                   double velocity,
                                   struct SlRoad **out);

/**
 * # Safety
 * `h` must be a live handle or NULL (returns 0).
 */
size_t sl_road_len(const struct SlRoad *h);

/**
 * Copies up to `cap` samples into `buf`; `written` receives the count.
 *
 * # Safety
 * `buf` must have room for `cap` doubles; `written` may be NULL.
 */
enum SlStatus sl_road_samples(const struct SlRoad *h, double *buf, size_t cap, size_t *written);

/**
 * # Safety
 * `h` must be NULL or a road handle not yet freed.
 */
void sl_road_free(struct SlRoad *h);

/**
 * Closed-loop simulation over the whole road.
 *
 * `params` and `fuzzy` may be NULL for the defaults. Gains are used only in
 * fuzzy-PID mode.
 *
 * # Safety
 * Non-NULL pointers must be valid; `road` must be a live handle.
 */
enum SlStatus sl_simulate(const struct SlPlantParams *params,
                          const struct SlFuzzy *fuzzy,
                          const struct SlRoad *road,
                          enum SlMode mode,
                          double kp,
                          double ki,
                          double kd,
                          double dt,
                          struct SlTimeSeries **out);

/**
 * Number of samples per channel.
 *
 * # Safety
 * `h` must be a live handle or NULL (returns 0).
 */
size_t sl_timeseries_len(const struct SlTimeSeries *h);

/**
 * Number of channels (time plus nine signals).
 */
size_t sl_timeseries_channel_count(void);

/**
 * Static NUL-terminated name of channel `index`, or NULL if out of range.
 */
const char *sl_timeseries_channel_name(size_t index);

/**
 * Copies up to `cap` values of channel `index` into `buf`.
 *
 * # Safety
 * `buf` must have room for `cap` doubles; `written` may be NULL.
 */
enum SlStatus sl_timeseries_channel(const struct SlTimeSeries *h,
                                    size_t index,
                                    double *buf,
                                    size_t cap,
                                    size_t *written);

/**
 * Metrics over samples with `t > settle_skip`.
 *
 * # Safety
 * `h` must be a live handle; `out` must be writable.
 */
enum SlStatus sl_timeseries_metrics(const struct SlTimeSeries *h,
                                    double settle_skip,
                                    struct SlMetrics *out);

/**
 * # Safety
 * `h` must be NULL or a time series handle not yet freed.
 */
void sl_timeseries_free(struct SlTimeSeries *h);

/**
 * Chaotic fruit-fly minimization of a caller-supplied objective over positive gains.
 *
 * `gains_out` receives kp, ki, kd; `score_out` may be NULL.
 *
 * # Safety
 * `objective` must be callable with `user_data`; `gains_out` must have room for three doubles.
 */
enum SlStatus sl_cfoa_minimize(SlObjective objective,
                               void *user_data,
                               size_t pop_size,
                               size_t max_iter,
                               uint64_t seed,
                               double *gains_out,
                               double *score_out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SUSPLAB_H */
