#ifndef ANISO_H
#define ANISO_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum AnisoStatus {
  ANISO_STATUS_OK = 0,
  ANISO_STATUS_NULL_POINTER = 1,
  ANISO_STATUS_INVALID_INPUT = 2,
  ANISO_STATUS_SINGULAR_POINT = 3,
  ANISO_STATUS_ASSUMPTION_VIOLATED = 4,
  ANISO_STATUS_CONFIGURATION = 5,
  ANISO_STATUS_UNSUPPORTED_KIND = 6,
  ANISO_STATUS_WINDOW_TOO_LARGE = 7,
  ANISO_STATUS_DEGENERATE = 8,
  ANISO_STATUS_MESH = 9,
  ANISO_STATUS_PRECONDITION = 10,
  ANISO_STATUS_NUMERICAL = 11,
  ANISO_STATUS_CONVERGENCE = 12,
  ANISO_STATUS_IO = 13,
  ANISO_STATUS_PANIC = 14,
} AnisoStatus;

// Opaque planar domain.
typedef struct AnisoDomain AnisoDomain;

// Opaque anisotropic norm.
typedef struct AnisoNorm AnisoNorm;

// Opaque stress operator, optionally regularized.
typedef struct AnisoOperator AnisoOperator;

// Opaque finite element solution: mesh vertices and nodal values.
typedef struct AnisoSolution AnisoSolution;

// Opaque Young function.
typedef struct AnisoYoung AnisoYoung;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or null. Valid until the next failing call.
const char *aniso_last_error_message(void);

void aniso_clear_last_error(void);

// Library version as a static NUL-terminated string.
const char *aniso_version(void);

// # Safety
// `out` must be valid for writing a handle pointer.
enum AnisoStatus aniso_norm_new_euclidean(struct AnisoNorm **out);

// `H(xi) = sqrt(a_1 xi_1^2 + a_2 xi_2^2)`.
//
// # Safety
// `out` must be valid for writing a handle pointer.
enum AnisoStatus aniso_norm_new_weighted(double a1, double a2, struct AnisoNorm **out);

// `H(xi) = (alpha |xi|_q^p + beta |xi|^p)^(1/p)`.
//
// # Safety
// `out` must be valid for writing a handle pointer.
enum AnisoStatus aniso_norm_new_blend(double p,
                                      double q,
                                      double alpha,
                                      double beta,
                                      struct AnisoNorm **out);

// # Safety
// `norm` must be null or a handle from `aniso_norm_new_*` not yet freed.
void aniso_norm_free(struct AnisoNorm *norm);

// `H(xi)` for a planar `xi`.
//
// # Safety
// `xi` must point to 2 doubles and `out` to 1.
enum AnisoStatus aniso_norm_value(const struct AnisoNorm *norm, const double *xi, double *out);

// Dual norm `H_0(x)`.
//
// # Safety
// `x` must point to 2 doubles and `out` to 1.
enum AnisoStatus aniso_norm_dual_value(const struct AnisoNorm *norm, const double *x, double *out);

// `B(t) = t^p`.
//
// # Safety
// `out` must be valid for writing a handle pointer.
enum AnisoStatus aniso_young_new_power(double p, struct AnisoYoung **out);

// `B(t) = t^p log^q(c + t)`.
//
// # Safety
// `out` must be valid for writing a handle pointer.
enum AnisoStatus aniso_young_new_power_log(double p, double q, double c, struct AnisoYoung **out);

// # Safety
// `young` must be null or a handle from `aniso_young_new_*` not yet freed.
void aniso_young_free(struct AnisoYoung *young);

// Stress operator from copies of `norm` and `young`; `epsilon` in (0, 1) regularizes, 0 does not.
//
// # Safety
// `norm` and `young` must be live handles; `out` must be valid for writing a handle pointer.
enum AnisoStatus aniso_operator_new(const struct AnisoNorm *norm,
                                    const struct AnisoYoung *young,
                                    double epsilon,
                                    struct AnisoOperator **out);

// # Safety
// `op` must be null or a handle from `aniso_operator_new` not yet freed.
void aniso_operator_free(struct AnisoOperator *op);

// `A(xi)` into `out[0..2]`.
//
// # Safety
// `xi` must point to 2 doubles and `out` to 2 writable doubles.
enum AnisoStatus aniso_operator_stress(const struct AnisoOperator *op,
                                       const double *xi,
                                       double *out);

// Row-major `D A_eps(xi)` into `out[0..4]`; needs a regularized operator and `xi != 0`.
//
// # Safety
// `xi` must point to 2 doubles and `out` to 4 writable doubles.
enum AnisoStatus aniso_operator_jacobian(const struct AnisoOperator *op,
                                         const double *xi,
                                         double *out);

// `Lambda max{1, s_b} / (lambda min{1, i_b})`.
//
// # Safety
// `out` must point to 1 writable double.
enum AnisoStatus aniso_operator_ellipticity_ratio(const struct AnisoOperator *op, double *out);

// # Safety
// `out` must be valid for writing a handle pointer.
enum AnisoStatus aniso_domain_new_disk(double radius, struct AnisoDomain **out);

// # Safety
// `out` must be valid for writing a handle pointer.
enum AnisoStatus aniso_domain_new_ellipse(double a, double b, struct AnisoDomain **out);

// `|x/a|^m + |y/b|^m < 1` with even `m >= 2`.
//
// # Safety
// `out` must be valid for writing a handle pointer.
enum AnisoStatus aniso_domain_new_superellipse(double a,
                                               double b,
                                               uint32_t m,
                                               struct AnisoDomain **out);

// Counter-clockwise polygon from `n` interleaved `x, y` pairs.
//
// # Safety
// `xy` must point to `2 n` doubles; `out` must be valid for writing a handle pointer.
enum AnisoStatus aniso_domain_new_polygon(const double *xy, size_t n, struct AnisoDomain **out);

// # Safety
// `dom` must be null or a handle from `aniso_domain_new_*` not yet freed.
void aniso_domain_free(struct AnisoDomain *dom);

// # Safety
// `out` must point to 1 writable double.
enum AnisoStatus aniso_domain_area(const struct AnisoDomain *dom, double *out);

// Dirichlet problem `-div A(grad u) = source` solved by epsilon-continuation on a mesh of size `h`.
//
// # Safety
// `op` and `dom` must be live handles; `out` must be valid for writing a handle pointer.
enum AnisoStatus aniso_solve(const struct AnisoOperator *op,
                             const struct AnisoDomain *dom,
                             double source,
                             double h,
                             struct AnisoSolution **out);

// # Safety
// `sol` must be null or a handle from `aniso_solve` not yet freed.
void aniso_solution_free(struct AnisoSolution *sol);

// Number of mesh vertices, or 0 for a null handle.
//
// # Safety
// `sol` must be null or a live handle.
size_t aniso_solution_len(const struct AnisoSolution *sol);

// Copies interleaved vertex coordinates (`2 len` doubles) and nodal values (`len` doubles).
// Either output may be null to skip it.
//
// # Safety
// Non-null outputs must have room for the sizes above, with `len = aniso_solution_len(sol)`.
enum AnisoStatus aniso_solution_copy(const struct AnisoSolution *sol, double *xy, double *values);

// # Safety
// `out` must point to 1 writable double.
enum AnisoStatus aniso_solution_final_epsilon(const struct AnisoSolution *sol, double *out);

// Convex-domain estimate at mesh size `h`: writes `|V|_H1 / ||f||_L2` and the constant it is compared with.
//
// # Safety
// `op` and `dom` must be live handles; `ratio` and `bound` must each point to 1 writable double.
enum AnisoStatus aniso_verify_convex(const struct AnisoOperator *op,
                                     const struct AnisoDomain *dom,
                                     double source,
                                     double h,
                                     double *ratio,
                                     double *bound);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ANISO_H */
