#ifndef BLK_RKSYLV_H
#define BLK_RKSYLV_H

/* Generated by cbindgen; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum RksStrategy {
  RKS_STRATEGY_ADM = 0,
  RKS_STRATEGY_SADM = 1,
  RKS_STRATEGY_EXTENDED = 2,
} RksStrategy;

typedef enum RksStatus {
  RKS_STATUS_OK = 0,
  /**
   * The solve finished without reaching the tolerance; a solution is still returned.
   */
  RKS_STATUS_NOT_CONVERGED = 1,
  RKS_STATUS_NULL_POINTER = 2,
  RKS_STATUS_INVALID_ARGUMENT = 3,
  RKS_STATUS_DIMENSION_MISMATCH = 4,
  RKS_STATUS_POLE_ON_SPECTRUM = 5,
  RKS_STATUS_BREAKDOWN = 6,
  RKS_STATUS_SPECTRA_OVERLAP = 7,
  RKS_STATUS_NUMERICAL_FAILURE = 8,
  RKS_STATUS_PANIC = 9,
} RksStatus;

typedef struct RksProblem RksProblem;

typedef struct RksSolution RksSolution;

typedef struct RksOptions {
  double tol;
  size_t max_iter;
  enum RksStrategy strategy;
  size_t fov_samples;
  /**
   * Follow each complex pole by its conjugate.
   */
  bool pairing;
  /**
   * For tridiagonal problems, sample the fields of values of the full
   * operators instead of the projected matrices.
   */
  bool operator_fov;
} RksOptions;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. Valid until the
 * next failing call on the same thread.
 */
const char *rks_last_error_message(void);

struct RksOptions rks_options_default(void);

/**
 * Poisson benchmark on `n` interior grid points per direction.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum RksStatus rks_problem_poisson(size_t n, struct RksProblem **out);

/**
 * Convection–diffusion benchmark with the reference convection field.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum RksStatus rks_problem_convdiff(size_t n, double epsilon, struct RksProblem **out);

/**
 * Dense problem: `a` is n×n, `b` is m×m, `u` is n×bs, `v` is m×bs.
 *
 * # Safety
 * Every array must hold the stated number of interleaved complex entries.
 */
enum RksStatus rks_problem_dense(size_t n,
                                 size_t m,
                                 size_t bs,
                                 const double *a,
                                 const double *b,
                                 const double *u,
                                 const double *v,
                                 struct RksProblem **out);

/**
 * Tridiagonal problem. Each operator is given by its sub-, main and
 * super-diagonal (lengths k-1, k, k-1).
 *
 * # Safety
 * Every array must hold the stated number of interleaved complex entries.
 */
enum RksStatus rks_problem_tridiagonal(size_t n,
                                       const double *a_sub,
                                       const double *a_diag,
                                       const double *a_sup,
                                       size_t m,
                                       const double *b_sub,
                                       const double *b_diag,
                                       const double *b_sup,
                                       size_t bs,
                                       const double *u,
                                       const double *v,
                                       struct RksProblem **out);

/**
 * Sizes `n`, `m` and block size of a problem.
 *
 * # Safety
 * `p` must come from a constructor; output pointers may be null.
 */
enum RksStatus rks_problem_dims(const struct RksProblem *p, size_t *n, size_t *m, size_t *bs);

/**
 * # Safety
 * `p` must come from a constructor and not be used afterwards.
 */
void rks_problem_free(struct RksProblem *p);

/**
 * Solves the problem. On `Ok` and `NotConverged` a solution is stored in `out`.
 *
 * # Safety
 * `p` must come from a constructor; `opts` may be null for defaults.
 */
enum RksStatus rks_solve(const struct RksProblem *p,
                         const struct RksOptions *opts,
                         struct RksSolution **out);

/**
 * Shapes of the factors `U` (n×ru), `Y` (ru×rv) and `V` (m×rv).
 *
 * # Safety
 * `s` must come from [`rks_solve`]; output pointers may be null.
 */
enum RksStatus rks_solution_dims(const struct RksSolution *s,
                                 size_t *n,
                                 size_t *ru,
                                 size_t *m,
                                 size_t *rv);

/**
 * Copies `U` into `buf` (`len` doubles, at least `2·n·ru`).
 *
 * # Safety
 * `buf` must hold `len` doubles.
 */
enum RksStatus rks_solution_copy_u(const struct RksSolution *s, double *buf, size_t len);

/**
 * Copies `Y` into `buf` (at least `2·ru·rv` doubles).
 *
 * # Safety
 * `buf` must hold `len` doubles.
 */
enum RksStatus rks_solution_copy_y(const struct RksSolution *s, double *buf, size_t len);

/**
 * Copies `V` into `buf` (at least `2·m·rv` doubles).
 *
 * # Safety
 * `buf` must hold `len` doubles.
 */
enum RksStatus rks_solution_copy_v(const struct RksSolution *s, double *buf, size_t len);

/**
 * Relative residual of the returned iterate, or NaN for a null handle.
 *
 * # Safety
 * `s` must come from [`rks_solve`] or be null.
 */
double rks_solution_residual(const struct RksSolution *s);

/**
 * # Safety
 * `s` must come from [`rks_solve`] or be null.
 */
size_t rks_solution_iterations(const struct RksSolution *s);

/**
 * # Safety
 * `s` must come from [`rks_solve`] or be null.
 */
bool rks_solution_converged(const struct RksSolution *s);

/**
 * Copies up to `len` relative residuals (one per iteration) and returns the
 * number of iterations recorded.
 *
 * # Safety
 * `buf` must hold `len` doubles or be null when `len` is 0.
 */
size_t rks_solution_history(const struct RksSolution *s, double *buf, size_t len);

/**
 * # Safety
 * `s` must come from [`rks_solve`] and not be used afterwards.
 */
void rks_solution_free(struct RksSolution *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* BLK_RKSYLV_H */
