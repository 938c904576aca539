#ifndef CKLH_H
#define CKLH_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Identifiers for `cklh_app_new`.
 */
typedef enum CklhApplication {
  CKLH_APPLICATION_SPLIT_COMPLEX_RICCATI = 0,
  CKLH_APPLICATION_DIFFUSION_RICCATI = 1,
  CKLH_APPLICATION_KUMMER_SCHWARZ_NEG = 2,
  CKLH_APPLICATION_KUMMER_SCHWARZ_POS = 3,
  CKLH_APPLICATION_ERMAKOV_NEG = 4,
  CKLH_APPLICATION_ERMAKOV_POS = 5,
} CklhApplication;

typedef enum CklhStatus {
  CKLH_STATUS_OK = 0,
  CKLH_STATUS_NULL_POINTER = 1,
  CKLH_STATUS_INVALID_ARGUMENT = 2,
  CKLH_STATUS_DOMAIN = 3,
  CKLH_STATUS_POLE = 4,
  CKLH_STATUS_SYMPLECTIC_DEGENERACY = 5,
  CKLH_STATUS_NO_REAL_SOLUTION = 6,
  CKLH_STATUS_DEGENERATE_CONFIGURATION = 7,
  CKLH_STATUS_BLOW_UP = 8,
  /**
   * A Rust panic was caught at the boundary.
   */
  CKLH_STATUS_INTERNAL = 9,
} CklhStatus;

/**
 * Opaque Lie–Hamilton system.
 */
typedef struct CklhSystem CklhSystem;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the last error of this thread into `buf` (NUL-terminated, truncated to `len`)
 * and returns the full message length in bytes.
 *
 * # Safety
 * `buf` must be null or point to `len` writable bytes.
 */
size_t cklh_last_error(char *buf, size_t len);

/**
 * Library version as a static NUL-terminated string.
 */
const char *cklh_version(void);

/**
 * The curved I4 class at curvature `kappa`.
 *
 * # Safety
 * `out` must be writable.
 */
enum CklhStatus cklh_i4_new(double kappa, struct CklhSystem **out);

/**
 * The curved P2 class on the space (kappa1, kappa2).
 *
 * # Safety
 * `out` must be writable.
 */
enum CklhStatus cklh_p2_new(double kappa1, double kappa2, struct CklhSystem **out);

/**
 * An application system; I4 applications read only `kappa1`.
 *
 * # Safety
 * `out` must be writable.
 */
enum CklhStatus cklh_app_new(enum CklhApplication app,
                             double kappa1,
                             double kappa2,
                             double lambda,
                             struct CklhSystem **out);

/**
 * Releases a handle; null is ignored.
 *
 * # Safety
 * `sys` must come from a `cklh_*_new` call and not be used afterwards.
 */
void cklh_system_free(struct CklhSystem *sys);

/**
 * Writes X1, X2, X3 at (x, y) as six numbers (x1, y1, x2, y2, x3, y3).
 *
 * # Safety
 * `sys` must be a live handle and `out` must hold six doubles.
 */
enum CklhStatus cklh_system_fields(const struct CklhSystem *sys, double x, double y, double *out);

/**
 * Writes (h1, h2, h3) at (x, y).
 *
 * # Safety
 * `sys` must be a live handle and `out` must hold three doubles.
 */
enum CklhStatus cklh_system_hamiltonians(const struct CklhSystem *sys,
                                         double x,
                                         double y,
                                         double *out);

/**
 * Writes the symplectic weight W with ω = W dx∧dy.
 *
 * # Safety
 * `sys` must be a live handle and `out` writable.
 */
enum CklhStatus cklh_system_weight(const struct CklhSystem *sys, double x, double y, double *out);

/**
 * Writes the Casimir evaluated on the Hamiltonians at (x, y).
 *
 * # Safety
 * `sys` must be a live handle and `out` writable.
 */
enum CklhStatus cklh_system_casimir(const struct CklhSystem *sys, double x, double y, double *out);

/**
 * Writes the right-hand side b1 X1 + b2 X2 + b3 X3 at (x, y) into `out[0..2]`.
 *
 * # Safety
 * `sys` must be a live handle, `b` must hold three doubles and `out` two.
 */
enum CklhStatus cklh_system_rhs(const struct CklhSystem *sys,
                                const double *b,
                                double x,
                                double y,
                                double *out);

/**
 * The two-point constant of motion of the curved I4 class.
 *
 * # Safety
 * `out` must be writable.
 */
enum CklhStatus cklh_i4_f2(double kappa, double x1, double y1, double x2, double y2, double *out);

/**
 * The two-point constant of motion of the curved P2 class.
 *
 * # Safety
 * `out` must be writable.
 */
enum CklhStatus cklh_p2_f2(double kappa1,
                           double kappa2,
                           double x1,
                           double y1,
                           double x2,
                           double y2,
                           double *out);

/**
 * I4 superposition from particular states `s2`, `s3` (two doubles each), constants
 * (mu1, mu2) and `branch` = +1 or -1; the state goes to `out[0..2]`.
 *
 * # Safety
 * `s2`, `s3` and `out` must each hold two doubles.
 */
enum CklhStatus cklh_i4_superpose(double kappa,
                                  const double *s2,
                                  const double *s3,
                                  double mu1,
                                  double mu2,
                                  int32_t branch_sign,
                                  double *out);

/**
 * 1D Riccati rule from three particular values and mu1.
 *
 * # Safety
 * `out` must be writable.
 */
enum CklhStatus cklh_riccati_superpose(double kappa,
                                       double x1,
                                       double x2,
                                       double x3,
                                       double mu1,
                                       double *out);

/**
 * Runs a verification suite by name. `passed` receives 1 or 0 and `failed` the number
 * of failing checks; either may be null.
 *
 * # Safety
 * `name` must be a NUL-terminated string.
 */
enum CklhStatus cklh_verify_suite(const char *name,
                                  uint64_t seed,
                                  size_t samples,
                                  int32_t *passed,
                                  size_t *failed);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CKLH_H */
