#ifndef SHORTPULSE_H
#define SHORTPULSE_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum SpStatus {
  SP_STATUS_OK = 0,
  SP_STATUS_NULL_POINTER = 1,
  SP_STATUS_INVALID_ARGUMENT = 2,
  /**
   * Parameters outside the domain of the requested computation (no saddle, singular line, ...).
   */
  SP_STATUS_DOMAIN = 3,
  SP_STATUS_NO_CONVERGENT_ROOT = 4,
  SP_STATUS_NOT_CONVERGED = 5,
  SP_STATUS_OUT_OF_RANGE = 6,
  SP_STATUS_PANIC = 99,
} SpStatus;

typedef enum SpEquilibrium {
  SP_EQUILIBRIUM_SADDLE = 0,
  SP_EQUILIBRIUM_CENTER = 1,
} SpEquilibrium;

typedef enum SpWaveClass {
  SP_WAVE_CLASS_BREAKING_KINK_PAIR = 0,
  SP_WAVE_CLASS_SMOOTH_HOMOCLINIC_CANDIDATE = 1,
  SP_WAVE_CLASS_CLOSED_ORBITS = 2,
  SP_WAVE_CLASS_PERIODIC_CUSP_WAVES = 3,
} SpWaveClass;

typedef enum SpConvention {
  SP_CONVENTION_PRINTED = 0,
  SP_CONVENTION_CONSISTENT = 1,
} SpConvention;

/**
 * Opaque orbit with slow-time samples.
 */
typedef struct SpOrbit SpOrbit;

/**
 * Opaque truncated series solution.
 */
typedef struct SpSeries SpSeries;

typedef struct SpParams {
  double c;
  double beta;
  double gamma;
} SpParams;

typedef struct SpClassification {
  enum SpEquilibrium equilibrium;
  enum SpWaveClass wave_class;
  uint32_t n_lines;
  double lines[2];
  uint32_t n_singular_equilibria;
  /**
   * `(u, y)` pairs; only the first `n_singular_equilibria` are meaningful.
   */
  double singular_equilibria[4][2];
} SpClassification;

typedef struct SpSoliton {
  double amplitude;
  double width;
  double action;
  double gradient_norm;
} SpSoliton;

typedef struct SpEmbedded {
  bool nontrivial_found;
  uint32_t n_roots;
  /**
   * NaN when no degenerate branch was computed.
   */
  double degenerate_rho_sq_over_c;
  double degenerate_amplitude_sq_over_c;
  double degenerate_third_residual;
  double min_scaled_residual;
} SpEmbedded;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *sp_version(void);

/**
 * Copies the calling thread's last error message into `buf` (truncated, always terminated).
 *
 * Returns the full message length excluding the terminator.
 *
 * # Safety
 * `buf` must be null or valid for `len` bytes.
 */
size_t sp_last_error_message(char *buf, size_t len);

/**
 * # Safety
 * `params` and `result` must be null or valid pointers.
 */
enum SpStatus sp_classify(const struct SpParams *params, struct SpClassification *result);

/**
 * Builds the series with a prescribed leading coefficient `a1`; `convention` is an
 * [`SpConvention`] value.
 *
 * # Safety
 * `params` and `series` must be null or valid pointers.
 */
enum SpStatus sp_series_new(const struct SpParams *params,
                            double a1,
                            uint32_t order,
                            uint32_t convention,
                            struct SpSeries **series);

/**
 * Finds the continuity roots in the default search interval and builds the series from the
 * convergent one; fails with `NoConvergentRoot` otherwise.
 *
 * # Safety
 * `params` and `series` must be null or valid pointers.
 */
enum SpStatus sp_series_select(const struct SpParams *params,
                               uint32_t order,
                               uint32_t convention,
                               struct SpSeries **series);

/**
 * # Safety
 * `series` must be null or a handle from this library not yet freed.
 */
void sp_series_free(struct SpSeries *series);

/**
 * Leading coefficient, NaN for a null handle.
 *
 * # Safety
 * `series` must be null or a live handle.
 */
double sp_series_a1(const struct SpSeries *series);

/**
 * # Safety
 * `series` must be null or a live handle.
 */
uint32_t sp_series_order(const struct SpSeries *series);

/**
 * Coefficient `a_k` for `1 ≤ k ≤ order`.
 *
 * # Safety
 * `series` and `value` must be null or valid pointers.
 */
enum SpStatus sp_series_coefficient(const struct SpSeries *series, uint32_t k, double *value);

/**
 * `u(z)`, with the odd extension for `z < 0`.
 *
 * # Safety
 * `series` and `value` must be null or valid pointers.
 */
enum SpStatus sp_series_eval(const struct SpSeries *series, double z, double *value);

/**
 * Integrates the regularized system from `(u0, y0)` and attaches slow time.
 *
 * # Safety
 * `params` and `orbit` must be null or valid pointers.
 */
enum SpStatus sp_orbit_integrate(const struct SpParams *params,
                                 double u0,
                                 double y0,
                                 double xi_end,
                                 double step,
                                 struct SpOrbit **orbit);

/**
 * # Safety
 * `orbit` must be null or a handle from this library not yet freed.
 */
void sp_orbit_free(struct SpOrbit *orbit);

/**
 * # Safety
 * `orbit` must be null or a live handle.
 */
size_t sp_orbit_len(const struct SpOrbit *orbit);

/**
 * Sample `i` as `(xi, u, y, z)`.
 *
 * # Safety
 * `orbit` must be null or a live handle; `sample` must be null or valid for four doubles.
 */
enum SpStatus sp_orbit_sample(const struct SpOrbit *orbit, size_t i, double *sample);

/**
 * Breaking point `z̃`, or NaN when the orbit does not break.
 *
 * # Safety
 * `orbit` must be null or a live handle.
 */
double sp_orbit_breaking_point(const struct SpOrbit *orbit);

/**
 * Gaussian-ansatz soliton of the base equation at speed `c > 0`, from the default guess.
 *
 * # Safety
 * `result` must be null or a valid pointer.
 */
enum SpStatus sp_soliton_solve(double c, struct SpSoliton *result);

/**
 * Multi-start search for simultaneous roots of the embedded-soliton system.
 *
 * # Safety
 * `result` must be null or a valid pointer.
 */
enum SpStatus sp_embedded_solve(double c, uint32_t starts, struct SpEmbedded *result);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SHORTPULSE_H */
