#ifndef PASSIVITY_H
#define PASSIVITY_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum PassivityStatus {
  PASSIVITY_STATUS_OK = 0,
  PASSIVITY_STATUS_NULL_POINTER = 1,
  PASSIVITY_STATUS_INVALID_INPUT = 2,
  /*
   The input lies outside the operation's domain (e.g. not passive).
   */
  PASSIVITY_STATUS_DOMAIN = 3,
  PASSIVITY_STATUS_NUMERICAL = 4,
  PASSIVITY_STATUS_CONVERGENCE = 5,
  PASSIVITY_STATUS_PANIC = 6,
} PassivityStatus;

typedef enum PassivityXiMethod {
  PASSIVITY_XI_METHOD_BISECTION = 0,
  PASSIVITY_XI_METHOD_EIGENVALUE_BASED = 1,
} PassivityXiMethod;

typedef enum PassivityNorm {
  PASSIVITY_NORM_TWO = 0,
  PASSIVITY_NORM_FROBENIUS = 1,
} PassivityNorm;

/*
 Opaque state-space model `{A, B, C, D}`.
 */
typedef struct PassivityModel PassivityModel;

typedef struct PassivityTolerances {
  double rank_tol;
  double psd_tol;
  double eig_tol;
  double circle_tol;
  double golden_tol;
  double bisect_tau;
} PassivityTolerances;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Default tolerances.
 */
struct PassivityTolerances passivity_tolerances_default(void);

/*
 Message of the last failed call on this thread, or null. Valid until the
 next call into this library from the same thread.
 */
const char *passivity_last_error(void);

/*
 Library version as a static string.
 */
const char *passivity_version(void);

/*
 Creates a model with `n` states and `m` ports. The `*_im` arrays may be null.

 # Safety
 Each non-null array must hold the number of values its shape requires:
 `A` n·n, `B` n·m, `C` m·n, `D` m·m. `out_model` must be writable.
 */
enum PassivityStatus passivity_model_new(size_t n,
                                         size_t m,
                                         const double *a_re,
                                         const double *a_im,
                                         const double *b_re,
                                         const double *b_im,
                                         const double *c_re,
                                         const double *c_im,
                                         const double *d_re,
                                         const double *d_im,
                                         struct PassivityModel **out_model);

/*
 Releases a model. Null is ignored.

 # Safety
 `model` must come from `passivity_model_new` and not be freed twice.
 */
void passivity_model_free(struct PassivityModel *model);

/*
 # Safety
 `model` must be a live handle; `n` and `m` writable.
 */
enum PassivityStatus passivity_model_dims(const struct PassivityModel *model, size_t *n, size_t *m);

/*
 Writes 1 if the model is strictly passive, 0 otherwise.

 # Safety
 `model` must be a live handle; `tol` null or valid; `result` writable.
 */
enum PassivityStatus passivity_is_strictly_passive(const struct PassivityModel *model,
                                                   const struct PassivityTolerances *tol,
                                                   int *result);

/*
 X-passivity radius `ρ_ℳ(X)`. A null `x_re` means `X = I`.

 # Safety
 `model` must be a live handle; `x_re`/`x_im` null or n·n values;
 `tol` null or valid; `rho` writable.
 */
enum PassivityStatus passivity_x_radius(const struct PassivityModel *model,
                                        const double *x_re,
                                        const double *x_im,
                                        const struct PassivityTolerances *tol,
                                        double *rho);

/*
 `ξ*(X)`, the largest LMI shift feasible at `X`. A null `x_re` means `X = I`.

 # Safety
 As for `passivity_x_radius`.
 */
enum PassivityStatus passivity_xi_star(const struct PassivityModel *model,
                                       const double *x_re,
                                       const double *x_im,
                                       const struct PassivityTolerances *tol,
                                       double *result);

/*
 Bracket `[lo, hi]` of `Ξ`, the supremum of `ξ*` over certificates.

 # Safety
 `model` must be a live handle; `tol` null or valid; `lo`, `hi` writable.
 */
enum PassivityStatus passivity_xi_sup(const struct PassivityModel *model,
                                      double tau,
                                      enum PassivityXiMethod method,
                                      const struct PassivityTolerances *tol,
                                      double *lo,
                                      double *hi);

/*
 Distance to passivity: the constrained shift `Ξ` and the norm of the
 refined perturbation.

 # Safety
 `model` must be a live handle; `tol` null or valid; `xi_big`, `norm_out` writable.
 */
enum PassivityStatus passivity_distance_to_passivity(const struct PassivityModel *model,
                                                     double tau,
                                                     enum PassivityNorm norm,
                                                     size_t budget,
                                                     const struct PassivityTolerances *tol,
                                                     double *xi_big,
                                                     double *norm_out);

/*
 Smallest `ξ ≥ 0` with `A/(1+ξ)` stable.

 # Safety
 `model` must be a live handle; `tol` null or valid; `result` writable.
 */
enum PassivityStatus passivity_distance_to_stability(const struct PassivityModel *model,
                                                     const struct PassivityTolerances *tol,
                                                     double *result);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PASSIVITY_H */
