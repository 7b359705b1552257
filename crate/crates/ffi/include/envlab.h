#ifndef ENVLAB_H
#define ENVLAB_H

/* Generated by cbindgen. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of every fallible call.
 */
typedef enum EnvlabStatus {
  ENVLAB_STATUS_OK = 0,
  ENVLAB_STATUS_NULL_POINTER = 1,
  ENVLAB_STATUS_INVALID_ARGUMENT = 2,
  ENVLAB_STATUS_DIMENSION = 3,
  ENVLAB_STATUS_BUFFER_TOO_SMALL = 4,
  ENVLAB_STATUS_NO_CONVERGENCE = 5,
  ENVLAB_STATUS_FAILED = 6,
  ENVLAB_STATUS_PANIC = 7,
} EnvlabStatus;

/**
 * A weighted ℓ_p space on finitely many atoms.
 */
typedef struct EnvlabSpace EnvlabSpace;

/**
 * A linear subspace of an [`EnvlabSpace`]. Holds its own copy of the space.
 */
typedef struct EnvlabSubspace EnvlabSubspace;

/**
 * Bounds on the minimal norm of a projection onto the subspace.
 */
typedef struct EnvlabProjectionBounds {
  /**
   * Norm of the best projection found.
   */
  double upper;
  /**
   * Proven lower bound on the minimum.
   */
  double lower;
  /**
   * Rigorous upper bound on the norm of the best projection.
   */
  double certified_upper;
  /**
   * True when `lower == upper` is an exact optimum.
   */
  bool exact;
} EnvlabProjectionBounds;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the most recent failure on this thread, or null.
 *
 * The pointer stays valid until the next failing call on the same thread.
 */
const char *envlab_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *envlab_version(void);

/**
 * Create a space with exponent `p` (`INFINITY` allowed) and `n` positive weights.
 *
 * # Safety
 * `weights` must point to `n` readable doubles and `out_space` to a writable handle slot.
 */
enum EnvlabStatus envlab_space_new(double p,
                                   const double *weights,
                                   uintptr_t n,
                                   struct EnvlabSpace **out_space);

/**
 * # Safety
 * `space` must be null or a handle from [`envlab_space_new`] not yet freed.
 */
void envlab_space_free(struct EnvlabSpace *space);

/**
 * Number of atoms, or 0 for a null handle.
 *
 * # Safety
 * `space` must be null or a live handle.
 */
uintptr_t envlab_space_atoms(const struct EnvlabSpace *space);

/**
 * Weighted p-norm of `f`.
 *
 * # Safety
 * `space` must be a live handle, `f` must hold `n` doubles, `norm` must be writable.
 */
enum EnvlabStatus envlab_space_norm(const struct EnvlabSpace *space,
                                    const double *f,
                                    uintptr_t n,
                                    double *norm);

/**
 * Duality map of `f` (‖Jf‖ = ‖f‖, ⟨Jf, f⟩ = ‖f‖²), written to `result` (room for `n` doubles).
 *
 * # Safety
 * `space` must be a live handle, `f` and `result` must each hold `n` doubles.
 */
enum EnvlabStatus envlab_space_duality_map(const struct EnvlabSpace *space,
                                           const double *f,
                                           uintptr_t n,
                                           double *result);

/**
 * Span of `count` vectors stored row-major in `vectors` (`count × n` doubles).
 *
 * # Safety
 * `space` must be a live handle, `vectors` must hold `count * n` doubles and
 * `out_subspace` must be writable.
 */
enum EnvlabStatus envlab_subspace_new(const struct EnvlabSpace *space,
                                      const double *vectors,
                                      uintptr_t count,
                                      uintptr_t n,
                                      struct EnvlabSubspace **out_subspace);

/**
 * # Safety
 * `sub` must be null or a handle not yet freed.
 */
void envlab_subspace_free(struct EnvlabSubspace *sub);

/**
 * Dimension of the subspace, or 0 for a null handle.
 *
 * # Safety
 * `sub` must be null or a live handle.
 */
uintptr_t envlab_subspace_dim(const struct EnvlabSubspace *sub);

/**
 * Reference-orthonormal basis, row-major `dim × n`, into a buffer of `capacity` doubles.
 *
 * # Safety
 * `sub` must be a live handle and `basis` must hold `capacity` doubles.
 */
enum EnvlabStatus envlab_subspace_basis(const struct EnvlabSubspace *sub,
                                        double *basis,
                                        uintptr_t capacity);

/**
 * Whether `f` lies in the subspace up to relative tolerance `tol`.
 *
 * # Safety
 * `sub` must be a live handle, `f` must hold `n` doubles, `result` must be writable.
 */
enum EnvlabStatus envlab_subspace_contains(const struct EnvlabSubspace *sub,
                                           const double *f,
                                           uintptr_t n,
                                           double tol,
                                           bool *result);

/**
 * Range of the conditional expectation onto the partition generated by the subspace.
 *
 * # Safety
 * `sub` must be a live handle and `envelope` writable.
 */
enum EnvlabStatus envlab_conditional_envelope(const struct EnvlabSubspace *sub,
                                              struct EnvlabSubspace **envelope);

/**
 * Smallest subspace containing the argument that is invariant under its
 * stabilizer in the isometry group.
 *
 * # Safety
 * `sub` must be a live handle and `envelope` writable.
 */
enum EnvlabStatus envlab_algebraic_envelope(const struct EnvlabSubspace *sub,
                                            struct EnvlabSubspace **envelope);

/**
 * Vector sublattice generated by the subspace.
 *
 * # Safety
 * `sub` must be a live handle and `closure` writable.
 */
enum EnvlabStatus envlab_lattice_closure(const struct EnvlabSubspace *sub,
                                         struct EnvlabSubspace **closure);

/**
 * Closed-form constant c₂(p) built from Γ((p+1)/2) and Γ((p′+1)/2); +∞ at p ∈ {1, ∞}.
 *
 * # Safety
 * `value` must be writable.
 */
enum EnvlabStatus envlab_c2(double p, double *value);

/**
 * Projection constant of ℓ₂ⁿ inside L₁.
 *
 * # Safety
 * `value` must be writable.
 */
enum EnvlabStatus envlab_c2n_l1(uintptr_t n, double *value);

/**
 * Minimal projection norm search with the default budget and the given seed.
 *
 * # Safety
 * `sub` must be a live handle and `bounds` writable.
 */
enum EnvlabStatus envlab_min_projection_norm(const struct EnvlabSubspace *sub,
                                             uint64_t seed,
                                             struct EnvlabProjectionBounds *bounds);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ENVLAB_H */
