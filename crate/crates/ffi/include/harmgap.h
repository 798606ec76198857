#ifndef HARMGAP_H
#define HARMGAP_H

/* Generated with cbindgen:0.29.4 */

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stddef.h>
#include <stdint.h>

typedef enum HgSubspace {
  HG_SUBSPACE_HANKEL = 0,
  HG_SUBSPACE_STACKED_PAIR = 1,
} HgSubspace;

// Result code of every fallible call.
typedef enum HgStatus {
  HG_STATUS_OK = 0,
  HG_STATUS_NULL_POINTER = 1,
  HG_STATUS_INVALID_ARGUMENT = 2,
  HG_STATUS_PENCIL_BOUND = 3,
  HG_STATUS_SEGMENT_TOO_SHORT = 4,
  HG_STATUS_RANK_DEFICIENT = 5,
  HG_STATUS_ZERO_SIGNAL = 6,
  HG_STATUS_DEGENERATE_POLE = 7,
  HG_STATUS_FORMAT = 8,
  HG_STATUS_IO = 9,
  HG_STATUS_BUFFER_TOO_SMALL = 10,
  HG_STATUS_OUT_OF_RANGE = 11,
  HG_STATUS_PANIC = 12,
} HgStatus;

// Estimation output.
typedef struct HgResult HgResult;

// Segmented signal under construction.
typedef struct HgSignal HgSignal;

// Estimator settings. `order == 0` selects the order automatically with
// `auto_order_ratio`; `pencil == 0` uses floor(K_min / 2).
typedef struct HgConfig {
  uintptr_t order;
  uintptr_t pencil;
  double auto_order_ratio;
  double tol_rank;
  enum HgSubspace subspace;
} HgConfig;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static NUL-terminated string.
const char *hg_version(void);

// Message of the last failure on this thread. Valid until the next failing
// call on the same thread; never NULL.
const char *hg_last_error_message(void);

struct HgConfig hg_config_default(void);

// Creates an empty signal with sampling interval `dt` seconds.
//
// # Safety
// `out` must be a valid pointer to writable storage for one handle.
enum HgStatus hg_signal_new(double dt, struct HgSignal **out);

// Appends a segment of `len` samples starting at `start_time` seconds.
// `im` may be NULL for real-valued data.
//
// # Safety
// `signal` must come from [`hg_signal_new`] or [`hg_signal_load_csv`];
// `re` (and `im` when not NULL) must point to `len` readable doubles.
enum HgStatus hg_signal_add_segment(struct HgSignal *signal,
                                    double start_time,
                                    const double *re,
                                    const double *im,
                                    uintptr_t len);

// Loads a signal CSV (`segment_index,sample_index,time_s,re,im`).
//
// # Safety
// `path` must be a NUL-terminated string; `out` must be writable.
enum HgStatus hg_signal_load_csv(const char *path, struct HgSignal **out);

// # Safety
// `signal` must be NULL or a live handle.
uintptr_t hg_signal_num_segments(const struct HgSignal *signal);

// # Safety
// `signal` must be NULL or a live handle; it is invalid afterwards.
void hg_signal_free(struct HgSignal *signal);

// Joint estimation over all segments of `signal`. `config` may be NULL for
// [`hg_config_default`].
//
// # Safety
// `signal` must be a live handle, `config` NULL or valid, `out` writable.
enum HgStatus hg_estimate(const struct HgSignal *signal,
                          const struct HgConfig *config,
                          struct HgResult **out);

// Number of estimated poles, 0 for NULL.
//
// # Safety
// `result` must be NULL or a live handle.
uintptr_t hg_result_order(const struct HgResult *result);

// # Safety
// `result` must be NULL or a live handle.
uintptr_t hg_result_num_segments(const struct HgResult *result);

// Pencil parameter used, 0 for NULL.
//
// # Safety
// `result` must be NULL or a live handle.
uintptr_t hg_result_pencil(const struct HgResult *result);

// # Safety
// `result` must be a live handle; `re`/`im` must hold `capacity` doubles.
enum HgStatus hg_result_poles(const struct HgResult *result,
                              double *re,
                              double *im,
                              uintptr_t capacity);

// Frequencies in Hz.
//
// # Safety
// `result` must be a live handle; `out` must hold `capacity` doubles.
enum HgStatus hg_result_frequencies(const struct HgResult *result, double *out, uintptr_t capacity);

// Damping factors in 1/s.
//
// # Safety
// `result` must be a live handle; `out` must hold `capacity` doubles.
enum HgStatus hg_result_dampings(const struct HgResult *result, double *out, uintptr_t capacity);

// Relative least-squares residual per segment.
//
// # Safety
// `result` must be a live handle; `out` must hold `capacity` doubles.
enum HgStatus hg_result_residuals(const struct HgResult *result, double *out, uintptr_t capacity);

// Complex amplitudes of `segment`, one per pole, referred to the
// segment's first sample.
//
// # Safety
// `result` must be a live handle; `re`/`im` must hold `capacity` doubles.
enum HgStatus hg_result_amplitudes(const struct HgResult *result,
                                   uintptr_t segment,
                                   double *re,
                                   double *im,
                                   uintptr_t capacity);

// # Safety
// `result` must be NULL or a live handle; it is invalid afterwards.
void hg_result_free(struct HgResult *result);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* HARMGAP_H */
