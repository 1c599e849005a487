#ifndef EPD_H
#define EPD_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum EpdOperator {
  EPD_OPERATOR_J0 = 0,
  EPD_OPERATOR_J1 = 1,
  EPD_OPERATOR_J1_EPS = 2,
} EpdOperator;

typedef enum EpdStatus {
  EPD_STATUS_OK = 0,
  EPD_STATUS_NULL_POINTER = 1,
  EPD_STATUS_PARSE = 2,
  EPD_STATUS_INVALID_SPEC = 3,
  EPD_STATUS_SINGULAR = 4,
  EPD_STATUS_NO_CONVERGENCE = 5,
  EPD_STATUS_DOMAIN = 6,
  EPD_STATUS_IO = 7,
  EPD_STATUS_PANIC = 8,
} EpdStatus;

/**
 * Opaque periodic state (ρ, u).
 */
typedef struct EpdFieldState EpdFieldState;

/**
 * Opaque solution spec.
 */
typedef struct EpdSpec EpdSpec;

typedef struct EpdComplex {
  double re;
  double im;
} EpdComplex;

/**
 * W and its derivatives up to second order at one point.
 */
typedef struct EpdJet {
  struct EpdComplex w;
  struct EpdComplex wz;
  struct EpdComplex wzb;
  struct EpdComplex wzz;
  struct EpdComplex wzbzb;
  struct EpdComplex wzzb;
} EpdJet;

typedef struct EpdCritical {
  struct EpdComplex beta;
  struct EpdComplex beta_bar;
  /**
   * 1 for a generic critical point.
   */
  uint32_t order;
  /**
   * max(|W_β|, |W_β̄|) at the returned point.
   */
  double residual;
  uint32_t iterations;
} EpdCritical;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or NULL after a success.
 * The pointer stays valid until the next call into this library on the same thread.
 */
const char *epd_last_error(void);

/**
 * Library version as a static string.
 */
const char *epd_version(void);

/**
 * Parses a spec such as `{"variant":"monomial","x":[1,1],"y":[1]}`.
 *
 * # Safety
 * `json` must be a NUL-terminated string and `out` writable.
 */
enum EpdStatus epd_spec_from_json(const char *json, struct EpdSpec **out);

/**
 * # Safety
 * `spec` must be NULL or a handle from [`epd_spec_from_json`] not yet freed.
 */
void epd_spec_free(struct EpdSpec *spec);

/**
 * Evaluates the 2-jet at `z` with z̄ = conj(z). `normalized` != 0 divides the
 * circle variants by 2πi.
 *
 * # Safety
 * `spec` must be a live handle and `out` writable.
 */
enum EpdStatus epd_spec_eval(const struct EpdSpec *spec,
                             struct EpdComplex z,
                             int normalized,
                             struct EpdJet *out);

/**
 * |(z-z̄)W_zz̄ - (W_z - W_z̄)/2| / |∇W| at `z`.
 *
 * # Safety
 * `spec` must be a live handle and `out` writable.
 */
enum EpdStatus epd_spec_residual(const struct EpdSpec *spec, struct EpdComplex z, double *out);

/**
 * Newton iteration for W_β = W_β̄ = 0 from `guess`.
 *
 * # Safety
 * `spec` must be a live handle and `out` writable.
 */
enum EpdStatus epd_find_critical(const struct EpdSpec *spec,
                                 struct EpdComplex guess,
                                 struct EpdCritical *out);

/**
 * Characteristic velocity λ_{k,l} at β (β̄ = conj β) for flow labels such
 * as `"x2"`, `"y0"` or `"delta-x:1"`.
 *
 * # Safety
 * `spec` must be a live handle, `k` and `l` NUL-terminated, `out` writable.
 */
enum EpdStatus epd_velocity(const struct EpdSpec *spec,
                            struct EpdComplex beta,
                            const char *k,
                            const char *l,
                            struct EpdComplex *out);

/**
 * The dual potential W* at `z`.
 *
 * # Safety
 * `spec` must be a live handle and `out` writable.
 */
enum EpdStatus epd_dual_value(const struct EpdSpec *spec,
                              struct EpdComplex z,
                              struct EpdComplex *out);

/**
 * Copies `n` samples of ρ and u on a periodic grid of the given length.
 *
 * # Safety
 * `rho` and `u` must point to `n` readable doubles and `out` be writable.
 */
enum EpdStatus epd_field_new(const double *rho,
                             const double *u,
                             size_t n,
                             double length,
                             struct EpdFieldState **out);

/**
 * # Safety
 * `state` must be NULL or a handle from [`epd_field_new`] not yet freed.
 */
void epd_field_free(struct EpdFieldState *state);

/**
 * Largest relative asymmetry |⟨f, J g⟩ + ⟨J f, g⟩| over random smooth test pairs.
 *
 * # Safety
 * `state` must be a live handle and `out` writable.
 */
enum EpdStatus epd_field_skew_check(const struct EpdFieldState *state,
                                    enum EpdOperator op,
                                    double eps,
                                    size_t trials,
                                    uint64_t seed,
                                    double *out);

/**
 * Solves the t = 0 Da Rios relations at `x` for (τ₀, K₀). Densities are JSON
 * objects such as `{"kind":"gaussian","amplitude":1,"center":0,"width":1}`;
 * NULL means zero.
 *
 * # Safety
 * String arguments must be NULL or NUL-terminated; `tau` and `k` writable.
 */
enum EpdStatus epd_darios_initial_root(const char *phi,
                                       const char *psi,
                                       double x,
                                       double tau_guess,
                                       double k_guess,
                                       double *tau,
                                       double *k);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* EPD_H */
