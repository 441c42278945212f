#ifndef OPPRECOND_H
#define OPPRECOND_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status returned by every function.
 */
typedef enum OppStatus {
  OPP_STATUS_OK = 0,
  OPP_STATUS_NULL_POINTER = 1,
  OPP_STATUS_INVALID_ARGUMENT = 2,
  OPP_STATUS_DIMENSION_MISMATCH = 3,
  OPP_STATUS_NOT_POSITIVE_DEFINITE = 4,
  OPP_STATUS_SIZE_LIMIT = 5,
  OPP_STATUS_UNSUPPORTED = 6,
  OPP_STATUS_INVALID_MESH = 7,
  OPP_STATUS_ORACLE_NOT_CONVERGED = 8,
  OPP_STATUS_PANIC = 9,
  OPP_STATUS_OTHER = 10,
} OppStatus;

typedef enum OppGeometry {
  OPP_GEOMETRY_INTERVAL = 0,
  OPP_GEOMETRY_CLOSED_POLYGON = 1,
  OPP_GEOMETRY_ELLIPSE = 2,
  OPP_GEOMETRY_UNIT_SQUARE = 3,
  OPP_GEOMETRY_CUBE_SURFACE = 4,
} OppGeometry;

typedef enum OppSpace {
  OPP_SPACE_DISCONTINUOUS = 0,
  OPP_SPACE_CONTINUOUS = 1,
} OppSpace;

typedef enum OppBackend {
  OPP_BACKEND_IDENTITY = 0,
  OPP_BACKEND_SINGLE_LAYER_CURVE = 1,
  OPP_BACKEND_ORDER2 = 2,
} OppBackend;

typedef enum OppVariant {
  OPP_VARIANT_DISC0 = 0,
  OPP_VARIANT_CONT1 = 1,
  OPP_VARIANT_DISC_HIGH_OPP = 2,
  OPP_VARIANT_DISC_HIGH_SSC = 3,
  OPP_VARIANT_CONT_HIGH_OPP = 4,
  OPP_VARIANT_CONT_HIGH_SSC = 5,
  OPP_VARIANT_JACOBI = 6,
} OppVariant;

/**
 * Opaque simplicial mesh.
 */
typedef struct OppMesh OppMesh;

/**
 * Opaque preconditioner `G`.
 */
typedef struct OppPrecond OppPrecond;

/**
 * Opaque discretized problem: mesh, trial space, `A` and `B^S`.
 */
typedef struct OppProblem OppProblem;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the last error message of this thread into `buf` (NUL
 * terminated, truncated to `len`). Returns the full message length.
 *
 * # Safety
 * `buf` must be null or valid for `len` bytes.
 */
size_t opp_last_error(char *buf, size_t len);

/**
 * Structured initial mesh; `dirichlet` = 1 puts the whole boundary on γ.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum OppStatus opp_mesh_structured(int geometry,
                                   size_t initial_elements,
                                   int dirichlet,
                                   struct OppMesh **out);

/**
 * Red refinement (`local` = 0) or bisection of the corner cells (`local` ≠ 0).
 *
 * # Safety
 * `mesh` must be a live handle and `out` a valid pointer.
 */
enum OppStatus opp_mesh_refine(const struct OppMesh *mesh, int local, struct OppMesh **out);

/**
 * # Safety
 * `mesh` must be null or a live handle.
 */
size_t opp_mesh_n_cells(const struct OppMesh *mesh);

/**
 * # Safety
 * `mesh` must be null or a handle not yet freed.
 */
void opp_mesh_free(struct OppMesh *mesh);

/**
 * Assembles `A` and `B^S` for the trial space of the given kind and
 * degree. `alpha` ≤ 0 selects the default rank-one weight.
 *
 * # Safety
 * `mesh` must be a live handle and `out` a valid pointer.
 */
enum OppStatus opp_problem_new(const struct OppMesh *mesh,
                               int space,
                               size_t degree,
                               int backend,
                               double alpha,
                               struct OppProblem **out);

/**
 * # Safety
 * `p` must be null or a live handle.
 */
size_t opp_problem_n_dofs(const struct OppProblem *p);

/**
 * Copies the dense Galerkin matrix `A` (column-major, `n*n` entries).
 *
 * # Safety
 * `p` must be a live handle and `buf` valid for `len` doubles.
 */
enum OppStatus opp_problem_matrix(const struct OppProblem *p, double *buf, size_t len);

/**
 * # Safety
 * `p` must be null or a handle not yet freed.
 */
void opp_problem_free(struct OppProblem *p);

/**
 * Builds a preconditioner for the problem's trial space.
 *
 * # Safety
 * `p` must be a live handle and `out` a valid pointer.
 */
enum OppStatus opp_precond_new(const struct OppProblem *p,
                               int variant,
                               double beta,
                               struct OppPrecond **out);

/**
 * `y = G r` for vectors of length `n`.
 *
 * # Safety
 * `g` must be a live handle; `r` and `y` valid for `n` doubles.
 */
enum OppStatus opp_precond_apply(const struct OppPrecond *g, const double *r, double *y, size_t n);

/**
 * Spectral condition number of `G A` by the dense oracle.
 *
 * # Safety
 * `p`, `g` must be live handles and `kappa` a valid pointer.
 */
enum OppStatus opp_kappa(const struct OppProblem *p, const struct OppPrecond *g, double *kappa);

/**
 * # Safety
 * `g` must be null or a handle not yet freed.
 */
void opp_precond_free(struct OppPrecond *g);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* OPPRECOND_H */
