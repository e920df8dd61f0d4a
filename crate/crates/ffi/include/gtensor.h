#ifndef GTENSOR_H
#define GTENSOR_H

/* Generated by cbindgen from crates/ffi; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

// Result code of every `gt_*` call.
typedef enum GtStatus {
  GT_STATUS_OK = 0,
  // A required pointer argument was null.
  GT_STATUS_NULL_POINTER = 1,
  // Malformed input, including invalid UTF-8 or JSON.
  GT_STATUS_INVALID_INPUT = 2,
  // A contract on the arguments was violated.
  GT_STATUS_PRECONDITION = 3,
  // A rank or general-position condition failed numerically.
  GT_STATUS_DEGENERATE = 4,
  // The solution is not unique.
  GT_STATUS_AMBIGUOUS = 5,
  // No reconstruction candidate converged.
  GT_STATUS_NO_CONVERGENCE = 6,
  // Other numerical failure.
  GT_STATUS_NUMERICAL = 7,
  // The caller's buffer is too small; the required size was reported.
  GT_STATUS_BUFFER_TOO_SMALL = 8,
  // A panic was caught at the boundary.
  GT_STATUS_INTERNAL = 9,
} GtStatus;

// Camera configuration handle.
typedef struct GtConfig GtConfig;

// Grassmann tensor handle.
typedef struct GtTensor GtTensor;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the last failed call on this thread, or null. Valid until the
// next `gt_*` call on the same thread.
const char *gt_last_error(void);

// Library version as a static NUL-terminated string.
const char *gt_version(void);

// Release a string returned by this library. Null is ignored.
//
// # Safety
// `s` must come from a `gt_*` out-parameter and not be freed twice.
void gt_string_free(char *s);

// Random generic configuration of `r` cameras `P^n -> P^{m_i}`.
//
// # Safety
// `m` must point to `r` values and `out` must be writable.
enum GtStatus gt_config_random(uintptr_t n,
                               const uintptr_t *m,
                               uintptr_t r,
                               uint64_t seed,
                               struct GtConfig **out);

// Parse a configuration from its JSON form.
//
// # Safety
// `json` must be a NUL-terminated string and `out` writable.
enum GtStatus gt_config_from_json(const char *json, struct GtConfig **out);

// JSON form of a configuration; free with `gt_string_free`.
//
// # Safety
// `cfg` must be a live handle and `out` writable.
enum GtStatus gt_config_to_json(const struct GtConfig *cfg, char **out);

// # Safety
// `cfg` must be null or a handle not yet freed.
void gt_config_free(struct GtConfig *cfg);

// Stacked camera matrix, row-major. `rows` and `cols` are always set; the
// data is copied only when `cap >= rows * cols`.
//
// # Safety
// `cfg` must be live; `buf` must hold `cap` values; `rows`, `cols` writable.
enum GtStatus gt_config_stacked(const struct GtConfig *cfg,
                                double *buf,
                                uintptr_t cap,
                                uintptr_t *rows,
                                uintptr_t *cols);

// Tensor of `cfg` for the profile `alpha` (one entry per camera).
//
// # Safety
// `cfg` must be live, `alpha` must point to `alpha_len` values, `out` writable.
enum GtStatus gt_tensor_compute(const struct GtConfig *cfg,
                                const uintptr_t *alpha,
                                uintptr_t alpha_len,
                                struct GtTensor **out);

// Number of entries; zero for a null handle.
//
// # Safety
// `t` must be null or live.
uintptr_t gt_tensor_len(const struct GtTensor *t);

// Copy the canonical entries into `buf`.
//
// # Safety
// `t` must be live and `buf` must hold `cap` values.
enum GtStatus gt_tensor_entries(const struct GtTensor *t, double *buf, uintptr_t cap);

// # Safety
// `json` must be a NUL-terminated string and `out` writable.
enum GtStatus gt_tensor_from_json(const char *json, struct GtTensor **out);

// # Safety
// `t` must be live and `out` writable.
enum GtStatus gt_tensor_to_json(const struct GtTensor *t, char **out);

// Projective distance between two tensors of the same profile.
//
// # Safety
// `a`, `b` must be live and `out` writable.
enum GtStatus gt_tensor_distance(const struct GtTensor *a, const struct GtTensor *b, double *out);

// # Safety
// `t` must be null or a handle not yet freed.
void gt_tensor_free(struct GtTensor *t);

// Contraction of `t` against a subspace tuple given as `{"forms": ...}`.
//
// # Safety
// `t` must be live, `tuple_json` NUL-terminated, `out` writable.
enum GtStatus gt_incidence_value(const struct GtTensor *t, const char *tuple_json, double *out);

// Determinant of the stacked form-camera products for a subspace tuple.
//
// # Safety
// `cfg` must be live, `tuple_json` NUL-terminated, `out` writable.
enum GtStatus gt_incidence_oracle(const struct GtConfig *cfg, const char *tuple_json, double *out);

// Tensor from a correspondence file's JSON. `min_count == 0` requires the
// default of `D - 1` tuples.
//
// # Safety
// `json` must be NUL-terminated and `out` writable.
enum GtStatus gt_estimate(const char *json, uintptr_t min_count, struct GtTensor **out);

// Reconstruction orbits as a JSON array, best first.
//
// # Safety
// `t` must be live and `out` writable.
enum GtStatus gt_reconstruct(const struct GtTensor *t,
                             uintptr_t restarts,
                             uint64_t seed,
                             char **out);

// Sets `*out` to 1 when the configurations differ by a homography and
// per-camera scales, else 0.
//
// # Safety
// `a`, `b` must be live and `out` writable.
enum GtStatus gt_pgl_equivalent(const struct GtConfig *a,
                                const struct GtConfig *b,
                                double tol,
                                int32_t *out);

// Dual of a line-camera configuration. With `identified != 0` the dual's
// images are carried back to the original image lines.
//
// # Safety
// `cfg` must be live and `out` writable.
enum GtStatus gt_dual_config(const struct GtConfig *cfg, int32_t identified, struct GtConfig **out);

// Numerical rank of the Jacobian of the tensor map at `cfg`.
//
// # Safety
// `cfg` must be live, `alpha` must point to `alpha_len` values, `out` writable.
enum GtStatus gt_jacobian_rank(const struct GtConfig *cfg,
                               const uintptr_t *alpha,
                               uintptr_t alpha_len,
                               uintptr_t *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* GTENSOR_H */
