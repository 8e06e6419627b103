#ifndef QCBKIT_H
#define QCBKIT_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every fallible call.
 */
typedef enum QkStatus {
  QK_STATUS_OK = 0,
  QK_STATUS_NULL_POINTER = 1,
  QK_STATUS_PARSE_ERROR = 2,
  QK_STATUS_INVALID_ARGUMENT = 3,
  /**
   * The oracle broke its claims (`0^ω` outside, or a member of norm >= 1).
   */
  QK_STATUS_ORACLE_VIOLATION = 4,
  /**
   * A check ran and failed.
   */
  QK_STATUS_CHECK_FAILED = 5,
  QK_STATUS_PANIC = 6,
} QkStatus;

/**
 * Opaque witness chain produced by the adversary.
 */
typedef struct QkChain QkChain;

/**
 * Opaque point of `M` with finite support.
 */
typedef struct QkPoint QkPoint;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or an empty string.
 * Valid until the next failing call on the same thread.
 */
const char *qk_last_error(void);

/**
 * Library version as a static string.
 */
const char *qk_version(void);

/**
 * Releases a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` must come from this library and must not be used afterwards.
 */
void qk_string_free(char *s);

/**
 * Parses a point such as `[0:1, 2:1/2^2]`.
 *
 * # Safety
 * `text` must be a valid C string and `out` a writable pointer.
 */
enum QkStatus qk_point_parse(const char *text, struct QkPoint **out);

/**
 * # Safety
 * `p` must come from [`qk_point_parse`] or be null.
 */
void qk_point_free(struct QkPoint *p);

/**
 * Canonical text form of the point.
 *
 * # Safety
 * `p` must be a live handle and `out` writable.
 */
enum QkStatus qk_point_to_string(const struct QkPoint *p, char **out);

/**
 * Exact norm as `j/2^e`.
 *
 * # Safety
 * `p` must be a live handle and `out` writable.
 */
enum QkStatus qk_point_norm(const struct QkPoint *p, char **out);

/**
 * Exact distance as `j/2^e`.
 *
 * # Safety
 * `p`, `q` must be live handles and `out` writable.
 */
enum QkStatus qk_point_dist(const struct QkPoint *p, const struct QkPoint *q, char **out);

/**
 * Checks `r_M(e_M(x)) = x` on `0..depth` and, when `full` is set, the
 * full chain as well. `CheckFailed` on a mismatch.
 *
 * # Safety
 * `p` must be a live handle.
 */
enum QkStatus qk_roundtrip(const struct QkPoint *p, size_t depth, bool full);

/**
 * Runs the adversary against an oracle spec (`ball`, `ball & x[0]=0`, ...).
 *
 * # Safety
 * `oracle` must be a valid C string and `out` writable.
 */
enum QkStatus qk_adversary_run(const char *oracle, size_t depth, struct QkChain **out);

/**
 * # Safety
 * `c` must come from [`qk_adversary_run`] or be null.
 */
void qk_chain_free(struct QkChain *c);

/**
 * Number of levels, `K + 1`. Zero for a null handle.
 *
 * # Safety
 * `c` must be a live handle or null.
 */
size_t qk_chain_len(const struct QkChain *c);

/**
 * Serialized record of level `k`.
 *
 * # Safety
 * `c` must be a live handle and `out` writable.
 */
enum QkStatus qk_chain_record(const struct QkChain *c, size_t k, char **out);

/**
 * Re-checks the chain against the oracle it was built from.
 *
 * # Safety
 * `c` must be a live handle.
 */
enum QkStatus qk_chain_verify(const struct QkChain *c);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* QCBKIT_H */
