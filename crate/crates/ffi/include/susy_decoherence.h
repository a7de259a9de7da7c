#ifndef SUSY_DECOHERENCE_H
#define SUSY_DECOHERENCE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

enum SdStatus
#if defined(__cplusplus) || __STDC_VERSION__ >= 202311L
  : int32_t
#endif // defined(__cplusplus) || __STDC_VERSION__ >= 202311L
 {
  SD_STATUS_OK = 0,
  SD_STATUS_NULL_POINTER = 1,
  SD_STATUS_INVALID_ARGUMENT = 2,
  /**
   * The superpotential expression did not parse.
   */
  SD_STATUS_PARSE = 3,
  /**
   * The model has no usable harmonic reduction.
   */
  SD_STATUS_MODEL = 4,
  /**
   * Norm loss, box truncation or another numerical contract failure.
   */
  SD_STATUS_NUMERICAL = 5,
  /**
   * `capacity` was too small; the required count was still written.
   */
  SD_STATUS_BUFFER_TOO_SMALL = 6,
  SD_STATUS_PANIC = 7,
};
#ifndef __cplusplus
#if __STDC_VERSION__ >= 202311L
typedef enum SdStatus SdStatus;
#else
typedef int32_t SdStatus;
#endif // __STDC_VERSION__ >= 202311L
#endif // __cplusplus

/**
 * Values accepted for `channel` arguments.
 */
enum SdChannel
#if defined(__cplusplus) || __STDC_VERSION__ >= 202311L
  : int32_t
#endif // defined(__cplusplus) || __STDC_VERSION__ >= 202311L
 {
  SD_CHANNEL_PLUS = 0,
  SD_CHANNEL_MINUS = 1,
};
#ifndef __cplusplus
#if __STDC_VERSION__ >= 202311L
typedef enum SdChannel SdChannel;
#else
typedef int32_t SdChannel;
#endif // __STDC_VERSION__ >= 202311L
#endif // __cplusplus

/**
 * Values accepted for `method` arguments.
 */
enum SdMethod
#if defined(__cplusplus) || __STDC_VERSION__ >= 202311L
  : int32_t
#endif // defined(__cplusplus) || __STDC_VERSION__ >= 202311L
 {
  SD_METHOD_PAPER_EQ30 = 0,
  SD_METHOD_EQUAL_FREQ_EQ34 = 1,
  SD_METHOD_GAUSSIAN_ORACLE = 2,
  SD_METHOD_GRID = 3,
};
#ifndef __cplusplus
#if __STDC_VERSION__ >= 202311L
typedef enum SdMethod SdMethod;
#else
typedef int32_t SdMethod;
#endif // __STDC_VERSION__ >= 202311L
#endif // __cplusplus

/**
 * Opaque model handle.
 */
typedef struct SdModel SdModel;

/**
 * Quadratic model of one channel about its equilibrium.
 */
typedef struct SdHarmonicChannel {
  double x0;
  double omega0;
  double v0;
  double f;
  double e0;
  double g;
  double mass;
  double hbar;
} SdHarmonicChannel;

typedef struct SdComplex {
  double re;
  double im;
} SdComplex;

/**
 * Grid propagation settings. `half_width <= 0` and `dt <= 0` select the
 * automatic box and `period / 20000`.
 */
typedef struct SdGridOptions {
  size_t n;
  double half_width;
  double dt;
  size_t steps;
  size_t sample_every;
  bool clamp_harmonic;
} SdGridOptions;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *sd_version(void);

/**
 * Static description of a status code; unknown codes get a fixed text.
 */
const char *sd_status_message(int32_t status);

/**
 * Message for the most recent failure on this thread, or NULL. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *sd_last_error_message(void);

/**
 * Parses `expression` as the superpotential `W(x)` and creates a model.
 *
 * # Safety
 * `expression` must be a NUL-terminated string and `out_model` a valid
 * pointer. On success `*out_model` owns a handle for [`sd_model_free`].
 */
SdStatus sd_model_new(const char *expression, double mass, double hbar, struct SdModel **out_model);

/**
 * Releases a model. NULL is ignored.
 *
 * # Safety
 * `model` must come from [`sd_model_new`] and not have been freed.
 */
void sd_model_free(struct SdModel *model);

/**
 * Writes the stable equilibria of channel `channel` (ascending) to `out`.
 * `*out_count` always receives the number found.
 *
 * # Safety
 * `out` must hold `capacity` doubles (it may be NULL when `capacity` is 0).
 */
SdStatus sd_model_equilibria(const struct SdModel *model,
                             int32_t channel,
                             double *out,
                             size_t capacity,
                             size_t *out_count);

/**
 * Harmonic reduction of one channel about its selected equilibrium.
 *
 * # Safety
 * `out` must point to writable storage for one [`SdHarmonicChannel`].
 */
SdStatus sd_model_harmonic_channel(const struct SdModel *model,
                                   int32_t channel,
                                   struct SdHarmonicChannel *out);

/**
 * Decoherence factor `D(t)` at `count` times by a closed-form method
 * (`SD_METHOD_PAPER_EQ30`, `SD_METHOD_EQUAL_FREQ_EQ34` or
 * `SD_METHOD_GAUSSIAN_ORACLE`). The oracle starts from the vacuum Gaussian
 * of the geometric-mean frequency at `x = 0`. Grid results come from
 * [`sd_grid_decoherence`].
 *
 * # Safety
 * `times` and `out` must each hold `count` elements.
 */
SdStatus sd_decoherence_series(const struct SdModel *model,
                               int32_t method,
                               const double *times,
                               size_t count,
                               struct SdComplex *out);

/**
 * Defaults matching the command-line tool: n = 2048, automatic box and
 * step, 20000 steps sampled every 100, harmonic clamp on.
 *
 * # Safety
 * `out` must point to writable storage for one [`SdGridOptions`].
 */
SdStatus sd_grid_options_default(struct SdGridOptions *out);

/**
 * Propagates the vacuum Gaussian at `x = 0` in both channels on a grid and
 * writes the sample times and `D(t)`. `*out_count` always receives the
 * number of samples.
 *
 * # Safety
 * `options` must be valid; `out_times` and `out_values` must each hold
 * `capacity` elements.
 */
SdStatus sd_grid_decoherence(const struct SdModel *model,
                             const struct SdGridOptions *options,
                             double *out_times,
                             struct SdComplex *out_values,
                             size_t capacity,
                             size_t *out_count);

/**
 * Purity `Tr ρ²` of the spin state with amplitudes `c_plus`, `c_minus`
 * (unit total weight) and decoherence factor `d`.
 *
 * # Safety
 * `out` must point to a writable double.
 */
SdStatus sd_purity(struct SdComplex c_plus,
                   struct SdComplex c_minus,
                   struct SdComplex d,
                   double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SUSY_DECOHERENCE_H */
