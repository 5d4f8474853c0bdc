#ifndef HAUSDIM_H
#define HAUSDIM_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every fallible call.
 */
typedef enum HdStatus {
  HD_STATUS_OK = 0,
  HD_STATUS_INVALID_INPUT = 1,
  HD_STATUS_RESOURCE = 2,
  HD_STATUS_NUMERIC = 3,
  HD_STATUS_PRECONDITION = 4,
  HD_STATUS_NULL_POINTER = 5,
  HD_STATUS_PANIC = 6,
} HdStatus;

/**
 * The dimension bound of a residue set.
 */
typedef struct HdDimensionBound HdDimensionBound;

/**
 * A residue set `B ⊂ {1, …, q-1}`.
 */
typedef struct HdResidueSet HdResidueSet;

/**
 * Scalar fields of a dimension bound.
 */
typedef struct HdBoundSummary {
  size_t q;
  double kappa_prime_1;
  double raw_bound;
  double bound;
  double subgroup_bound;
  size_t subgroup_order;
  double delta;
  size_t vertex_count;
  bool proper_inclusion;
  bool symmetrized;
} HdBoundSummary;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the last error message (NUL-terminated, truncated to `cap`) into
 * `buf` and returns the full message length excluding the terminator.
 * Passing a null `buf` only queries the length.
 *
 * # Safety
 * `buf` must be null or valid for `cap` bytes.
 */
size_t hd_last_error_message(char *buf, size_t cap);

/**
 * Library version as a static NUL-terminated string.
 */
const char *hd_version(void);

/**
 * Creates the residue set `{members[0], …, members[len-1]}` modulo `q`.
 *
 * # Safety
 * `members` must be valid for `len` reads (or null when `len == 0`);
 * `out` must be valid for one write.
 */
enum HdStatus hd_residue_set_new(size_t q,
                                 const size_t *members,
                                 size_t len,
                                 struct HdResidueSet **out);

/**
 * Creates a residue set from a comma-separated list such as `"1,3"`.
 *
 * # Safety
 * `list` must be a NUL-terminated string; `out` must be valid for one write.
 */
enum HdStatus hd_residue_set_parse(size_t q, const char *list, struct HdResidueSet **out);

/**
 * # Safety
 * `set` must be null or a handle from `hd_residue_set_new`/`hd_residue_set_parse`, not yet freed.
 */
void hd_residue_set_free(struct HdResidueSet *set);

/**
 * Whether `n` lies in `C_B`.
 *
 * # Safety
 * `set` must be a live handle; `out` must be valid for one write.
 */
enum HdStatus hd_in_cb(int64_t n, const struct HdResidueSet *set, bool *out);

/**
 * `κ(θ)` for a symmetric residue set, `θ ∈ (0, 1]`.
 *
 * # Safety
 * `set` must be a live handle; `out` must be valid for one write.
 */
enum HdStatus hd_kappa(const struct HdResidueSet *set, double theta, double *out);

/**
 * Computes the dimension bound of `set` (symmetrized if needed).
 *
 * # Safety
 * `set` must be a live handle; `out` must be valid for one write.
 */
enum HdStatus hd_dimension_bound_new(const struct HdResidueSet *set, struct HdDimensionBound **out);

/**
 * # Safety
 * `bound` must be null or a handle from `hd_dimension_bound_new`, not yet freed.
 */
void hd_dimension_bound_free(struct HdDimensionBound *bound);

/**
 * # Safety
 * `bound` must be a live handle; `out` must be valid for one write.
 */
enum HdStatus hd_dimension_bound_summary(const struct HdDimensionBound *bound,
                                         struct HdBoundSummary *out);

/**
 * Copies the witness vertex (length `q`) into `buf`. `len` receives `q`
 * in any case; if `cap < q` nothing is copied and `RESOURCE` is returned.
 *
 * # Safety
 * `bound` must be a live handle, `buf` valid for `cap` writes (or null
 * when `cap == 0`), `len` valid for one write.
 */
enum HdStatus hd_dimension_bound_witness(const struct HdDimensionBound *bound,
                                         double *buf,
                                         size_t cap,
                                         size_t *len);

/**
 * Closed-form `κ'(1)` for Riesz products with base `q`.
 *
 * # Safety
 * `out` must be valid for one write.
 */
enum HdStatus hd_kappa_prime_riesz(size_t q, double *out);

/**
 * Certified Riesz-product bound `1 + κ'(1)/log q`.
 *
 * # Safety
 * `out` must be valid for one write.
 */
enum HdStatus hd_bound_theorem3(size_t q, double *out);

/**
 * Explicit elementary Riesz-product estimate.
 *
 * # Safety
 * `out` must be valid for one write.
 */
enum HdStatus hd_bound_prop5(size_t q, double *out);

/**
 * Fan's main term `1 - h(a)/log q`.
 *
 * # Safety
 * `out` must be valid for one write.
 */
enum HdStatus hd_fan_main_term(double a, size_t q, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* HAUSDIM_H */
