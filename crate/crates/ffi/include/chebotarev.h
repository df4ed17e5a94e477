#ifndef CHEBOTAREV_H
#define CHEBOTAREV_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result codes.
typedef enum ChbStatus {
  CHB_STATUS_OK = 0,
  CHB_STATUS_NULL_POINTER = 1,
  CHB_STATUS_INVALID_ARGUMENT = 2,
  CHB_STATUS_RESOURCE_LIMIT = 3,
  CHB_STATUS_NOT_FOUND = 4,
  CHB_STATUS_IO = 5,
  CHB_STATUS_PANIC = 6,
} ChbStatus;

// Representation counts `S(N)` over the attainable range.
typedef struct ChbCounts ChbCounts;

// A validated problem instance.
typedef struct ChbInstance ChbInstance;

// Sieve of all primes up to `limit`.
typedef struct ChbPrimeTable ChbPrimeTable;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version, a static string.
const char *chb_version(void);

// Message for the last failed call on this thread, or NULL. Valid until the
// next call into the library on this thread.
const char *chb_last_error_message(void);

// # Safety
// `s` must be NULL or a string returned by this library.
void chb_string_free(char *s);

// # Safety
// `out` must be a valid pointer.
enum ChbStatus chb_prime_table_new(uint64_t limit, struct ChbPrimeTable **out);

// # Safety
// `t` must be NULL or a handle from `chb_prime_table_new`.
void chb_prime_table_free(struct ChbPrimeTable *t);

// Number of primes `≤ x` (x capped at the table limit).
//
// # Safety
// `t` and `out` must be valid.
enum ChbStatus chb_prime_table_pi(const struct ChbPrimeTable *t, uint64_t x, uint64_t *out);

// Parses an instance JSON document.
//
// # Safety
// `json` must be a NUL-terminated string and `out` valid.
enum ChbStatus chb_instance_from_json(const char *json, struct ChbInstance **out);

// Loads a built-in instance such as `classical-vinogradov`.
//
// # Safety
// `name` must be a NUL-terminated string and `out` valid.
enum ChbStatus chb_instance_builtin(const char *name, struct ChbInstance **out);

// # Safety
// `i` must be NULL or a handle from this library.
void chb_instance_free(struct ChbInstance *i);

// Cutoff `X` of an instance.
//
// # Safety
// `i` and `out` must be valid.
enum ChbStatus chb_instance_x(const struct ChbInstance *i, uint64_t *out);

// # Safety
// All pointers must be valid; the table limit must be at least `X`.
enum ChbStatus chb_representation_counts(const struct ChbPrimeTable *t,
                                         const struct ChbInstance *i,
                                         struct ChbCounts **out);

// # Safety
// `c` must be NULL or a handle from this library.
void chb_counts_free(struct ChbCounts *c);

// Smallest and largest `N` held.
//
// # Safety
// All pointers must be valid.
enum ChbStatus chb_counts_range(const struct ChbCounts *c, int64_t *n_min, int64_t *n_max);

// `S(N)` weighted by `∏ log p_i`, and the number of prime tuples. Zero
// outside the range.
//
// # Safety
// All pointers must be valid.
enum ChbStatus chb_counts_get(const struct ChbCounts *c,
                              int64_t n,
                              double *weighted,
                              uint64_t *unweighted);

// Predicted main term at `N` with Euler factors up to `p_max`.
//
// # Safety
// All pointers must be valid.
enum ChbStatus chb_main_term(const struct ChbInstance *i, int64_t n, uint64_t p_max, double *out);

// Full local-factor report at `N` as JSON.
//
// # Safety
// All pointers must be valid; free the string with `chb_string_free`.
enum ChbStatus chb_local_factors_json(const struct ChbInstance *i,
                                      int64_t n,
                                      uint64_t p_max,
                                      char **out);

// Comparison rows for the instance's `N` values plus a summary, as JSON
// `{"rows": [...], "summary": {...}}`.
//
// # Safety
// All pointers must be valid; free the string with `chb_string_free`.
enum ChbStatus chb_verify_json(const struct ChbPrimeTable *t,
                               const struct ChbInstance *i,
                               char **out);

// Number of squarefree `n ≤ y` whose prime factors are all `≤ z`.
uint64_t chb_smooth_count(double z, double y);

// Best rational approximation `a/q` of `alpha` with `q ≤ qmax`.
//
// # Safety
// `a` and `q` must be valid.
enum ChbStatus chb_best_approx(double alpha, uint64_t qmax, int64_t *a, uint64_t *q);

// Elliptic-curve certificate as JSON. `field` is a built-in field name or
// a GaloisSpec JSON document.
//
// # Safety
// All pointers must be valid; free the string with `chb_string_free`.
enum ChbStatus chb_construct_curve_json(const char *field, uint64_t search_limit, char **out);

// Re-verifies a certificate; `valid` is set to 1 or 0 and `reasons`
// receives a JSON array of failure reasons.
//
// # Safety
// All pointers must be valid; free the string with `chb_string_free`.
enum ChbStatus chb_check_certificate_json(const char *certificate,
                                          const char *field,
                                          int32_t *valid,
                                          char **reasons);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CHEBOTAREV_H */
