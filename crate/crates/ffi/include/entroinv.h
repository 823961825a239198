#ifndef ENTROINV_H
#define ENTROINV_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes. Values 2 to 4 match the command-line exit codes.
 */
typedef enum EntroinvStatus {
  ENTROINV_STATUS_OK = 0,
  ENTROINV_STATUS_INVALID_ARGUMENT = 1,
  ENTROINV_STATUS_INFEASIBLE_DATUM = 2,
  ENTROINV_STATUS_RANK_DEFICIENT = 3,
  ENTROINV_STATUS_ITERATION_LIMIT = 4,
  ENTROINV_STATUS_DOMAIN_VIOLATION = 5,
  ENTROINV_STATUS_NULL_POINTER = 6,
  ENTROINV_STATUS_BUFFER_TOO_SMALL = 7,
  ENTROINV_STATUS_PANIC = 8,
} EntroinvStatus;

/**
 * Box `[a_1, b_1] x ... x [a_N, b_N]`.
 */
typedef struct EntroinvBox EntroinvBox;

/**
 * Matrix, datum and box of one inverse problem.
 */
typedef struct EntroinvProblem EntroinvProblem;

/**
 * Output of [`entroinv_solve`].
 */
typedef struct EntroinvSolution EntroinvSolution;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. The pointer stays
 * valid until the next failing call on the same thread.
 */
const char *entroinv_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *entroinv_version(void);

/**
 * Creates a box from `n` lower and `n` upper bounds.
 *
 * # Safety
 * `lower` and `upper` must point to `n` readable doubles; `out` must be a
 * valid pointer to a handle slot.
 */
enum EntroinvStatus entroinv_box_new(const double *lower,
                                     const double *upper,
                                     size_t n,
                                     struct EntroinvBox **out);

/**
 * # Safety
 * `domain` must be null or a handle from [`entroinv_box_new`] not yet freed.
 */
void entroinv_box_free(struct EntroinvBox *domain);

/**
 * Number of coordinates of a box (0 for a null handle).
 *
 * # Safety
 * `domain` must be null or a live box handle.
 */
size_t entroinv_box_dim(const struct EntroinvBox *domain);

/**
 * `M(tau) = sum_j ln(e^{a_j tau_j} + e^{b_j tau_j})`.
 *
 * # Safety
 * `domain` must be a live box handle, `tau` must point to `n` doubles and
 * `out` to one writable double.
 */
enum EntroinvStatus entroinv_log_partition(const struct EntroinvBox *domain,
                                           const double *tau,
                                           size_t n,
                                           double *out);

/**
 * Entropy of an interior point.
 *
 * # Safety
 * As for [`entroinv_log_partition`].
 */
enum EntroinvStatus entroinv_entropy(const struct EntroinvBox *domain,
                                     const double *xi,
                                     size_t n,
                                     double *out);

/**
 * `xi = phi(tau)`, the gradient of the log-partition.
 *
 * # Safety
 * `tau` must point to `n` doubles and `out` to `out_len` writable doubles.
 */
enum EntroinvStatus entroinv_phi(const struct EntroinvBox *domain,
                                 const double *tau,
                                 size_t n,
                                 double *out,
                                 size_t out_len);

/**
 * `tau = chi(xi)`, the inverse of [`entroinv_phi`].
 *
 * # Safety
 * `xi` must point to `n` doubles and `out` to `out_len` writable doubles.
 */
enum EntroinvStatus entroinv_chi(const struct EntroinvBox *domain,
                                 const double *xi,
                                 size_t n,
                                 double *out,
                                 size_t out_len);

/**
 * Bregman divergence of the entropy between two interior points.
 *
 * # Safety
 * `xi` and `eta` must point to `n` doubles, `out` to one writable double.
 */
enum EntroinvStatus entroinv_bregman(const struct EntroinvBox *domain,
                                     const double *xi,
                                     const double *eta,
                                     size_t n,
                                     double *out);

/**
 * Geodesic distance between two interior points in the entropy Hessian metric.
 *
 * # Safety
 * As for [`entroinv_bregman`].
 */
enum EntroinvStatus entroinv_dist_g(const struct EntroinvBox *domain,
                                    const double *xi0,
                                    const double *xi1,
                                    size_t n,
                                    double *out);

/**
 * Creates the problem `A xi = y` over a copy of `domain`. `a` is `rows x cols`
 * row-major, `y` has `rows` entries and the box must have `cols` coordinates.
 *
 * # Safety
 * Pointers must reference arrays of the stated sizes; `out` must be valid.
 */
enum EntroinvStatus entroinv_problem_new(const double *a,
                                         size_t rows,
                                         size_t cols,
                                         const double *y,
                                         const struct EntroinvBox *domain,
                                         struct EntroinvProblem **out);

/**
 * # Safety
 * `problem` must be null or a live problem handle.
 */
void entroinv_problem_free(struct EntroinvProblem *problem);

/**
 * Solves a problem. A solution handle is written whenever the solver ran,
 * including for non-converged outcomes; the return value is `Ok` only for a
 * converged solve, otherwise the status naming the failure.
 *
 * # Safety
 * `problem` must be a live problem handle and `out` a valid handle slot.
 */
enum EntroinvStatus entroinv_solve(const struct EntroinvProblem *problem,
                                   struct EntroinvSolution **out);

/**
 * # Safety
 * `solution` must be null or a live solution handle.
 */
void entroinv_solution_free(struct EntroinvSolution *solution);

/**
 * Copies the solution point (`N` entries) into `out`.
 *
 * # Safety
 * `solution` must be live and `out` must hold `out_len` doubles.
 */
enum EntroinvStatus entroinv_solution_xi(const struct EntroinvSolution *solution,
                                         double *out,
                                         size_t out_len);

/**
 * Copies the multipliers (`K` entries) into `out`.
 *
 * # Safety
 * As for [`entroinv_solution_xi`].
 */
enum EntroinvStatus entroinv_solution_lambda(const struct EntroinvSolution *solution,
                                             double *out,
                                             size_t out_len);

/**
 * Entropy at the solution, dual value, duality gap and constraint residual
 * (infinity norm). Any output pointer may be null.
 *
 * # Safety
 * `solution` must be live; non-null outputs must be writable.
 */
enum EntroinvStatus entroinv_solution_values(const struct EntroinvSolution *solution,
                                             double *psi,
                                             double *dual,
                                             double *gap,
                                             double *residual_inf);

/**
 * Newton iterations used (0 for a null handle).
 *
 * # Safety
 * `solution` must be null or live.
 */
size_t entroinv_solution_iterations(const struct EntroinvSolution *solution);

/**
 * First-order change of the solution for a datum change `dy` (`K` entries),
 * written to `out` (`N` entries).
 *
 * # Safety
 * Handles must be live and belong together; arrays must have the stated sizes.
 */
enum EntroinvStatus entroinv_sensitivity_xi(const struct EntroinvProblem *problem,
                                            const struct EntroinvSolution *solution,
                                            const double *dy,
                                            size_t k,
                                            double *out,
                                            size_t out_len);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ENTROINV_H */
