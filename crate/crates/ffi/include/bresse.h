#ifndef BRESSE_H
#define BRESSE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Initial data presets for [`bresse_simulate_energy`].
 */
typedef enum BressePreset {
  BRESSE_PRESET_DEFAULT = 0,
  BRESSE_PRESET_MIXED = 1,
  BRESSE_PRESET_IMPULSE = 2,
} BressePreset;

/**
 * Status codes; nonzero values below 40 coincide with the CLI exit codes.
 */
typedef enum BresseStatus {
  BRESSE_STATUS_OK = 0,
  BRESSE_STATUS_INVALID_PARAMETER = 10,
  BRESSE_STATUS_PARSE = 11,
  BRESSE_STATUS_SCHEMA = 12,
  BRESSE_STATUS_TOO_COARSE = 13,
  BRESSE_STATUS_INCOMPATIBLE_BOUNDARY = 14,
  BRESSE_STATUS_INVALID_ARGUMENT = 15,
  BRESSE_STATUS_OUT_OF_RANGE = 20,
  BRESSE_STATUS_GRID_BEYOND_RESOLUTION = 21,
  BRESSE_STATUS_EMPTY_GRID = 22,
  BRESSE_STATUS_SINGULAR_AT_LAMBDA = 23,
  BRESSE_STATUS_SHIFT_SINGULAR = 24,
  BRESSE_STATUS_NO_CONVERGENCE = 25,
  BRESSE_STATUS_FACTORIZATION_FAILED = 26,
  BRESSE_STATUS_WINDOW_TOO_SMALL = 27,
  BRESSE_STATUS_NONPOSITIVE_ENERGY = 28,
  BRESSE_STATUS_IO = 30,
  BRESSE_STATUS_MALFORMED_INPUT = 31,
  BRESSE_STATUS_NULL_POINTER = 40,
  BRESSE_STATUS_BUFFER_TOO_SMALL = 41,
  BRESSE_STATUS_PANIC = 42,
} BresseStatus;

/**
 * Opaque assembled system.
 */
typedef struct BresseSystem BresseSystem;

/**
 * Material, geometric and damping parameters of the beam.
 */
typedef struct BresseParams {
  double rho1;
  double rho2;
  double k1;
  double k2;
  double k3;
  double l;
  double length;
  double alpha;
  double beta;
  double d0;
} BresseParams;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Writes the default parameter set into `out`.
 *
 * # Safety
 * `out` must be null or valid for writes.
 */
enum BresseStatus bresse_params_default(struct BresseParams *out);

/**
 * Validates `params`, meshes `[0, L]` with `n_elements` elements and
 * assembles the system. On success `*out` owns a new handle.
 *
 * # Safety
 * `params` must be null or point to a valid struct; `out` must be null or
 * valid for writes.
 */
enum BresseStatus bresse_system_new(const struct BresseParams *params,
                                    size_t n_elements,
                                    struct BresseSystem **out);

/**
 * Releases a handle from [`bresse_system_new`]. Null is ignored.
 *
 * # Safety
 * `sys` must be null or a handle not yet freed.
 */
void bresse_system_free(struct BresseSystem *sys);

/**
 * Number of displacement unknowns (the state has twice as many).
 *
 * # Safety
 * `sys` must be null or a live handle. Null yields 0.
 */
size_t bresse_system_dofs(const struct BresseSystem *sys);

/**
 * `‖(iλ − A_h)⁻¹‖` in the energy norm.
 *
 * # Safety
 * `sys` must be a live handle; `norm_out` valid for writes.
 */
enum BresseStatus bresse_resolvent_norm(const struct BresseSystem *sys,
                                        double lambda,
                                        uint64_t seed,
                                        double *norm_out);

/**
 * Eigenvalues near `iμ` for each of the `n_mu` shifts in `mu`.
 *
 * `*count_out` receives the number found. If it exceeds `capacity` the
 * call returns `BufferTooSmall` and nothing is written to `re_out`/`im_out`.
 *
 * # Safety
 * `mu` must hold `n_mu` doubles; `re_out`/`im_out` must hold `capacity`
 * doubles each; `count_out` and `abscissa_out` must be valid for writes.
 */
enum BresseStatus bresse_axis_scan(const struct BresseSystem *sys,
                                   const double *mu,
                                   size_t n_mu,
                                   uint64_t seed,
                                   double *re_out,
                                   double *im_out,
                                   size_t capacity,
                                   size_t *count_out,
                                   double *abscissa_out);

/**
 * Integrates from a preset initial state and records the energy every
 * `stride` steps (and at the final step).
 *
 * `*count_out` receives the number of samples. If it exceeds `capacity`
 * the call returns `BufferTooSmall` without running the simulation.
 *
 * # Safety
 * `times_out`/`energy_out` must hold `capacity` doubles each; `count_out`
 * must be valid for writes.
 */
enum BresseStatus bresse_simulate_energy(const struct BresseSystem *sys,
                                         enum BressePreset preset,
                                         double dt,
                                         double t_final,
                                         size_t stride,
                                         double *times_out,
                                         double *energy_out,
                                         size_t capacity,
                                         size_t *count_out);

/**
 * Writes 0 for equal wave speeds (`k1/ρ1 = k2/ρ2`), 1 otherwise.
 *
 * # Safety
 * `params` must point to a valid struct; `variant_out` valid for writes.
 */
enum BresseStatus bresse_classify_speeds(const struct BresseParams *params, int32_t *variant_out);

/**
 * Copies the last error message of this thread into `buf` (NUL-terminated,
 * truncated to `len`) and returns the full length including the NUL, or 0
 * when no error has been recorded.
 *
 * # Safety
 * `buf` must be null or valid for `len` bytes.
 */
size_t bresse_last_error_message(char *buf, size_t len);

/**
 * Library version as a static NUL-terminated string.
 */
const char *bresse_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* BRESSE_H */
