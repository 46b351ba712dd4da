#ifndef UTPC_H
#define UTPC_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

// Result codes.
typedef enum UtpcStatus {
  UTPC_STATUS_OK = 0,
  UTPC_STATUS_NULL_POINTER = 1,
  UTPC_STATUS_INVALID_ARGUMENT = 2,
  UTPC_STATUS_FIELD_MISMATCH = 3,
  UTPC_STATUS_DIMENSION_MISMATCH = 4,
  UTPC_STATUS_PRECONDITION = 5,
  UTPC_STATUS_BUDGET_EXCEEDED = 6,
  UTPC_STATUS_PANIC = 7,
} UtpcStatus;

// An element of `UT(n, F_q)`.
typedef struct UtpcElement UtpcElement;

// A finite field `F_q`.
typedef struct UtpcField UtpcField;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the last failing call on this thread; empty after a success.
// The pointer stays valid until the next call on the same thread.
const char *utpc_last_error_message(void);

// Creates `F_{p^k}`.
//
// # Safety
// `out` must be a valid pointer.
enum UtpcStatus utpc_field_new(uint32_t p, uint32_t k, struct UtpcField **out);

// # Safety
// `field` must come from [`utpc_field_new`] or be null.
void utpc_field_free(struct UtpcField *field);

// # Safety
// `field` and `out` must be valid pointers.
enum UtpcStatus utpc_field_order(const struct UtpcField *field, uint32_t *out);

// Builds an element of `UT(n, F)` from `n(n-1)/2` row-major strictly-upper entries.
//
// # Safety
// `entries` must point to `len` bytes; `field` and `out` must be valid.
enum UtpcStatus utpc_element_new(const struct UtpcField *field,
                                 uintptr_t n,
                                 const uint8_t *entries,
                                 uintptr_t len,
                                 struct UtpcElement **out);

// The identity of `UT(n, F)`.
//
// # Safety
// `field` and `out` must be valid pointers.
enum UtpcStatus utpc_element_identity(const struct UtpcField *field,
                                      uintptr_t n,
                                      struct UtpcElement **out);

// `t_{ij}(alpha)` in `UT(n, F)`, 1-based indices.
//
// # Safety
// `field` and `out` must be valid pointers.
enum UtpcStatus utpc_transvection(const struct UtpcField *field,
                                  uintptr_t n,
                                  uintptr_t i,
                                  uintptr_t j,
                                  uint8_t alpha,
                                  struct UtpcElement **out);

// # Safety
// `element` must come from this library or be null.
void utpc_element_free(struct UtpcElement *element);

// # Safety
// `element` and `out` must be valid pointers.
enum UtpcStatus utpc_element_dim(const struct UtpcElement *element, uintptr_t *out);

// Copies the strictly-upper entries into `buf`, which must hold `n(n-1)/2` bytes.
//
// # Safety
// `buf` must point to `len` writable bytes.
enum UtpcStatus utpc_element_entries(const struct UtpcElement *element,
                                     uint8_t *buf,
                                     uintptr_t len);

// `out = a b`.
//
// # Safety
// All pointers must be valid.
enum UtpcStatus utpc_element_mul(const struct UtpcElement *a,
                                 const struct UtpcElement *b,
                                 struct UtpcElement **out);

// `out = a^{-1}`.
//
// # Safety
// All pointers must be valid.
enum UtpcStatus utpc_element_inverse(const struct UtpcElement *a, struct UtpcElement **out);

// `out = [a, b] = a b a^{-1} b^{-1}`.
//
// # Safety
// All pointers must be valid.
enum UtpcStatus utpc_element_commutator(const struct UtpcElement *a,
                                        const struct UtpcElement *b,
                                        struct UtpcElement **out);

// Whether every first-superdiagonal entry of `a` is zero.
//
// # Safety
// All pointers must be valid.
enum UtpcStatus utpc_element_in_derived(const struct UtpcElement *a, bool *out);

// Whether `a` and `b` are equal.
//
// # Safety
// All pointers must be valid.
enum UtpcStatus utpc_element_equal(const struct UtpcElement *a,
                                   const struct UtpcElement *b,
                                   bool *out);

// `b`, `c` with `[b, c] = a`; fails with `UTPC_STATUS_PRECONDITION` outside the
// derived subgroup.
//
// # Safety
// All pointers must be valid.
enum UtpcStatus utpc_factor_commutator(const struct UtpcElement *a,
                                       struct UtpcElement **out_b,
                                       struct UtpcElement **out_c);

// Runs every identity check on `UT(n, F)`: exhaustively when `exhaustive`,
// else on `count` random instances per identity drawn from `seed`.
// Writes whether all of them held.
//
// # Safety
// `field` and `passed` must be valid pointers.
enum UtpcStatus utpc_verify_identities(const struct UtpcField *field,
                                       uintptr_t n,
                                       bool exhaustive,
                                       uintptr_t count,
                                       uint64_t seed,
                                       bool *passed);

// Counts the PC-maps of `UT(n, F)` (only those fixing every transvection when
// `almost_identity`) and writes the decimal count as a new string.
//
// # Safety
// `field` and `out` must be valid pointers; release the string with [`utpc_string_free`].
enum UtpcStatus utpc_enumerate_count(const struct UtpcField *field,
                                     uintptr_t n,
                                     bool almost_identity,
                                     uint64_t budget,
                                     char **out);

// # Safety
// `s` must come from this library or be null.
void utpc_string_free(char *s);

// Reads a NUL-terminated order string such as `"9"` or `"3^2"`.
//
// # Safety
// `q` must be a valid C string and `out` a valid pointer.
enum UtpcStatus utpc_field_from_order(const char *q, struct UtpcField **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* UTPC_H */
