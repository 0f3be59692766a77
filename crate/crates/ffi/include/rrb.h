#ifndef RRB_H
#define RRB_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes.
 */
typedef enum RrbStatus {
  RRB_STATUS_OK = 0,
  RRB_STATUS_NULL_POINTER = 1,
  RRB_STATUS_INVALID_ARGUMENT = 2,
  RRB_STATUS_INVARIANT_VIOLATION = 3,
  RRB_STATUS_NOT_AN_EQUILIBRIUM = 4,
  RRB_STATUS_POLE_PROXIMITY = 5,
  RRB_STATUS_EMPTY_LEVEL = 6,
  RRB_STATUS_EPSILON_NOT_POSITIVE = 7,
  RRB_STATUS_INTEGRATION_FAILURE = 8,
  RRB_STATUS_INDEX_OUT_OF_RANGE = 9,
  RRB_STATUS_PANIC = 10,
} RrbStatus;

typedef enum RrbFamily {
  RRB_FAMILY_E1 = 1,
  RRB_FAMILY_E2 = 2,
  RRB_FAMILY_E3 = 3,
  RRB_FAMILY_E4 = 4,
  RRB_FAMILY_E5 = 5,
} RrbFamily;

typedef enum RrbVerdictKind {
  RRB_VERDICT_KIND_LYAPUNOV_STABLE = 0,
  RRB_VERDICT_KIND_UNSTABLE = 1,
  RRB_VERDICT_KIND_UNDETERMINED = 2,
} RrbVerdictKind;

typedef enum RrbProvenance {
  RRB_PROVENANCE_NORM_DECAY = 0,
  RRB_PROVENANCE_ENERGY_MINIMUM = 1,
  RRB_PROVENANCE_SMALLER_NORM_WITNESS = 2,
  RRB_PROVENANCE_INTERIOR_INSTABILITY = 3,
  RRB_PROVENANCE_LYAPUNOV_QUADRATIC = 4,
  RRB_PROVENANCE_EMPIRICAL_ONLY = 5,
  RRB_PROVENANCE_NOT_COVERED = 6,
} RrbProvenance;

/**
 * Opaque list of equilibria.
 */
typedef struct RrbEquilibria RrbEquilibria;

/**
 * Opaque body configuration.
 */
typedef struct RrbSystem RrbSystem;

/**
 * Opaque integration result.
 */
typedef struct RrbTrajectory RrbTrajectory;

typedef struct RrbIntegratorSettings {
  double rtol;
  double atol;
  double h_init;
  double h_max;
  double t_end;
  /**
   * 0 forward, 1 backward.
   */
  int32_t backward;
  uint64_t max_steps;
} RrbIntegratorSettings;

/**
 * One equilibrium; `parameter` is NaN for the origin.
 */
typedef struct RrbEquilibrium {
  enum RrbFamily family;
  double parameter;
  double point[3];
  double residual;
} RrbEquilibrium;

typedef struct RrbVerdict {
  enum RrbVerdictKind kind;
  enum RrbProvenance provenance;
} RrbVerdict;

typedef struct RrbLimitReport {
  double x_m[3];
  double x_big_m[3];
  double d_forward;
  double d_backward;
  bool norms_monotone;
  bool ordering_holds;
} RrbLimitReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the calling thread's last error message into `buf` (NUL-terminated,
 * truncated to `len`). Returns the full message length without the NUL.
 *
 * # Safety
 * `buf` must be null or point to `len` writable bytes.
 */
size_t rrb_last_error_message(char *buf, size_t len);

/**
 * Creates a body from inverse moments `a[3]` (`0 < a1 < a2 < a3`), gains
 * `u[3]` and `epsilon`.
 *
 * # Safety
 * `a` and `u` must point to three doubles; `out` must be writable.
 */
enum RrbStatus rrb_system_new(const double *a,
                              const double *u,
                              double epsilon,
                              struct RrbSystem **out_system);

/**
 * Creates a body from principal moments `I1 > I2 > I3 > 0`.
 *
 * # Safety
 * As [`rrb_system_new`].
 */
enum RrbStatus rrb_system_from_moments(const double *moments,
                                       const double *u,
                                       double epsilon,
                                       struct RrbSystem **out_system);

/**
 * # Safety
 * `system` must be null or a handle from `rrb_system_*` not yet freed.
 */
void rrb_system_free(struct RrbSystem *system);

/**
 * # Safety
 * `system` must be a live handle, `x` three doubles, `out_value` writable.
 */
enum RrbStatus rrb_hamiltonian(const struct RrbSystem *system, const double *x, double *out_value);

/**
 * # Safety
 * `x` three doubles, `out_value` writable.
 */
enum RrbStatus rrb_casimir(const double *x, double *out_value);

/**
 * Evaluates the revised field (`revised != 0`) or the conservative one.
 *
 * # Safety
 * `x` three doubles, `out_xdot` three writable doubles.
 */
enum RrbStatus rrb_rhs(const struct RrbSystem *system,
                       int32_t revised,
                       const double *x,
                       double *out_xdot);

/**
 * `dH/dt` and `dC/dt` along the revised field.
 *
 * # Safety
 * `x` three doubles; both outputs writable.
 */
enum RrbStatus rrb_integral_rates(const struct RrbSystem *system,
                                  const double *x,
                                  double *out_dh_dt,
                                  double *out_dc_dt);

struct RrbIntegratorSettings rrb_integrator_settings_default(void);

/**
 * Integrates the revised field from `x0`.
 *
 * # Safety
 * `settings` must be readable; `out_trajectory` writable.
 */
enum RrbStatus rrb_integrate(const struct RrbSystem *system,
                             const double *x0,
                             const struct RrbIntegratorSettings *settings,
                             struct RrbTrajectory **out_trajectory);

/**
 * Number of samples; 0 for null.
 *
 * # Safety
 * `trajectory` must be null or live.
 */
size_t rrb_trajectory_len(const struct RrbTrajectory *trajectory);

/**
 * Sample `index`: time, state, `H`, `C` and the dissipation residual.
 * Any output pointer may be null to skip it.
 *
 * # Safety
 * `trajectory` must be live; non-null outputs writable (`out_x` three doubles).
 */
enum RrbStatus rrb_trajectory_sample(const struct RrbTrajectory *trajectory,
                                     size_t index,
                                     double *out_t,
                                     double *out_x,
                                     double *out_h,
                                     double *out_c,
                                     double *out_diss);

/**
 * # Safety
 * `trajectory` must be null or live.
 */
void rrb_trajectory_free(struct RrbTrajectory *trajectory);

/**
 * All equilibria with `H = level`.
 *
 * # Safety
 * `out_equilibria` writable.
 */
enum RrbStatus rrb_equilibria_on_level(const struct RrbSystem *system,
                                       double level,
                                       struct RrbEquilibria **out_equilibria);

/**
 * # Safety
 * `equilibria` must be null or live.
 */
size_t rrb_equilibria_len(const struct RrbEquilibria *equilibria);

/**
 * # Safety
 * `equilibria` live; `out_equilibrium` writable.
 */
enum RrbStatus rrb_equilibria_get(const struct RrbEquilibria *equilibria,
                                  size_t index,
                                  struct RrbEquilibrium *out_equilibrium);

/**
 * # Safety
 * `equilibria` must be null or live.
 */
void rrb_equilibria_free(struct RrbEquilibria *equilibria);

/**
 * The `E2` member at `lambda`.
 *
 * # Safety
 * `out_equilibrium` writable.
 */
enum RrbStatus rrb_e2_point(const struct RrbSystem *system,
                            double lambda,
                            struct RrbEquilibrium *out_equilibrium);

/**
 * Distance from `x` to the equilibrium set.
 *
 * # Safety
 * `x` three doubles; `out_distance` writable.
 */
enum RrbStatus rrb_distance_to_equilibria(const struct RrbSystem *system,
                                          const double *x,
                                          double *out_distance);

/**
 * Theorem-backed classification (requires `epsilon > 0`).
 *
 * # Safety
 * `equilibrium` readable; `out_verdict` writable.
 */
enum RrbStatus rrb_classify(const struct RrbSystem *system,
                            const struct RrbEquilibrium *equilibrium,
                            struct RrbVerdict *out_verdict);

/**
 * Forward and backward limit estimates over `horizon` with default tolerances.
 *
 * # Safety
 * `x0` three doubles; `out_report` writable.
 */
enum RrbStatus rrb_limit_report(const struct RrbSystem *system,
                                const double *x0,
                                double horizon,
                                struct RrbLimitReport *out_report);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* RRB_H */
