#ifndef TRIGPRED_H
#define TRIGPRED_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum TpStatus {
  TP_STATUS_OK = 0,
  // A required pointer was null or a string was not UTF-8.
  TP_STATUS_NULL_ARGUMENT = 1,
  // Invalid grid, measure, exponent, parameters or JSON.
  TP_STATUS_INVALID_INPUT = 2,
  // The problem is numerically degenerate (e.g. no projection exists).
  TP_STATUS_DEGENERATE = 3,
  // A measure is not absolutely continuous with respect to the other.
  TP_STATUS_NOT_ABSOLUTELY_CONTINUOUS = 4,
  // Internal panic; the library state is still usable.
  TP_STATUS_PANIC = 5,
} TpStatus;

// Opaque spectral measure.
typedef struct TpMeasure TpMeasure;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static NUL-terminated string.
const char *tp_version(void);

// Message of the last failed call on this thread, or null. The pointer is
// valid until the next call into the library on the same thread.
const char *tp_last_error_message(void);

// Parses a measure description, e.g.
// `{"density": {"family": "cos", "params": {"a": 2}}}` or
// `{"density": {"samples": [...]}, "atoms": [{"location": 0, "mass": 1}]}`.
// `grid_size` is used when the document does not fix one.
//
// # Safety
// `json` must be a NUL-terminated string; `out` must be writable.
enum TpStatus tp_measure_from_json(const char *json, size_t grid_size, struct TpMeasure **out);

// Builds a measure from `len` density samples at the cell midpoints of a
// uniform grid (`len` a power of two) plus `n_atoms` point masses.
//
// # Safety
// Arrays must hold the stated number of elements; `out` must be writable.
enum TpStatus tp_measure_from_samples(const double *samples,
                                      size_t len,
                                      const double *atom_locations,
                                      const double *atom_masses,
                                      size_t n_atoms,
                                      struct TpMeasure **out);

// Releases a measure; null is ignored.
//
// # Safety
// `m` must come from this library and not be used afterwards.
void tp_measure_free(struct TpMeasure *m);

// # Safety
// `m` must be a live handle; `out` must be writable.
enum TpStatus tp_measure_grid_size(const struct TpMeasure *m, size_t *out);

// # Safety
// `m` must be a live handle; `out` must be writable.
enum TpStatus tp_measure_total_mass(const struct TpMeasure *m, double *out);

// Interpolation error `d_p(μ)` of one missing value.
//
// # Safety
// `m` must be a live handle; `out` must be writable.
enum TpStatus tp_interp_distance(const struct TpMeasure *m, double p, double *out);

// `∫ |1 − φ_p(ν)|^p dμ` for the interpolation problem; may be `+∞`.
//
// # Safety
// Handles must be live; `out` must be writable.
enum TpStatus tp_interp_cross_error(const struct TpMeasure *nu,
                                    const struct TpMeasure *mu,
                                    double p,
                                    double *out);

// One-step prediction error `exp ∫ log w dλ`.
//
// # Safety
// `m` must be a live handle; `out` must be writable.
enum TpStatus tp_szego_distance(const struct TpMeasure *m, double *out);

// First `order` Taylor coefficients of the outer function, split into real
// and imaginary parts.
//
// # Safety
// `m` must be a live handle; `re` and `im` must hold `order` doubles.
enum TpStatus tp_outer_coefficients(const struct TpMeasure *m,
                                    size_t order,
                                    double *re,
                                    double *im);

// m-step prediction error `Σ_{j<m} |b_j|²` (the same for every `p`).
//
// # Safety
// `mu` must be a live handle; `out` must be writable.
enum TpStatus tp_mstep_distance(const struct TpMeasure *mu, size_t steps, double *out);

// # Safety
// Handles must be live; `out` must be writable.
enum TpStatus tp_mstep_cross_error(const struct TpMeasure *nu,
                                   const struct TpMeasure *mu,
                                   size_t steps,
                                   double p,
                                   double *out);

// `L²` projection of `1` onto `span{e_x : x ∈ freqs}`. Writes `k`
// coefficients and the distance.
//
// # Safety
// `mu` must be a live handle; `freqs`, `coeff_re`, `coeff_im` must hold
// `k` elements; `distance` must be writable.
enum TpStatus tp_finite_p2(const struct TpMeasure *mu,
                           const int64_t *freqs,
                           size_t k,
                           double *coeff_re,
                           double *coeff_im,
                           double *distance);

// Error of approximating `1` from the coset `x + qℤ`.
//
// # Safety
// `mu` must be a live handle; `out` must be writable.
enum TpStatus tp_periodic_distance(const struct TpMeasure *mu,
                                   size_t q,
                                   int64_t x,
                                   double p,
                                   double *out);

// # Safety
// Handles must be live; `out` must be writable.
enum TpStatus tp_periodic_cross_error(const struct TpMeasure *nu,
                                      const struct TpMeasure *mu,
                                      size_t q,
                                      int64_t x,
                                      double p,
                                      double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TRIGPRED_H */
