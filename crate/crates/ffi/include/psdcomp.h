#ifndef PSDCOMP_H
#define PSDCOMP_H

/* Generated by cbindgen. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

// Status codes.
typedef enum PsdcompStatus {
  PSDCOMP_STATUS_OK = 0,
  PSDCOMP_STATUS_NULL_POINTER = 1,
  PSDCOMP_STATUS_INVALID_ARGUMENT = 2,
  PSDCOMP_STATUS_IO = 3,
  PSDCOMP_STATUS_FORMAT = 4,
  PSDCOMP_STATUS_MISSING_WORD = 5,
  PSDCOMP_STATUS_UNKNOWN_RULE = 6,
  PSDCOMP_STATUS_UNKNOWN_MEASURE = 7,
  PSDCOMP_STATUS_DIMENSION_MISMATCH = 8,
  PSDCOMP_STATUS_NOT_PSD = 9,
  PSDCOMP_STATUS_NUMERICAL = 10,
  PSDCOMP_STATUS_PANIC = 11,
} PsdcompStatus;

// A square psd matrix.
typedef struct PsdcompMatrix PsdcompMatrix;

// A loaded word matrix store.
typedef struct PsdcompStore PsdcompStore;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or null. Valid until the
// next call into the library from the same thread.
const char *psdcomp_last_error(void);

// Library version as a static nul-terminated string.
const char *psdcomp_version(void);

// Loads a store written by `psdcomp build-matrices`.
//
// # Safety
// `path` must be a nul-terminated string and `out` a valid pointer.
enum PsdcompStatus psdcomp_store_load(const char *path, struct PsdcompStore **out);

// # Safety
// `store` must come from [`psdcomp_store_load`] or be null.
void psdcomp_store_free(struct PsdcompStore *store);

// Matrix dimension of the store, 0 for null.
//
// # Safety
// `store` must be a live handle or null.
uintptr_t psdcomp_store_dim(const struct PsdcompStore *store);

// Number of words in the store, 0 for null.
//
// # Safety
// `store` must be a live handle or null.
uintptr_t psdcomp_store_len(const struct PsdcompStore *store);

// Copies the matrix of `word` into a new handle.
//
// # Safety
// Pointers must be valid; `word` nul-terminated.
enum PsdcompStatus psdcomp_store_get(const struct PsdcompStore *store,
                                     const char *word,
                                     struct PsdcompMatrix **out);

// Builds a matrix from `dim * dim` row-major entries. The entries must be
// symmetric and psd.
//
// # Safety
// `data` must point to `dim * dim` doubles.
enum PsdcompStatus psdcomp_matrix_new(const double *data,
                                      uintptr_t dim,
                                      struct PsdcompMatrix **out);

// # Safety
// `matrix` must come from this library or be null.
void psdcomp_matrix_free(struct PsdcompMatrix *matrix);

// Dimension of the matrix, 0 for null.
//
// # Safety
// `matrix` must be a live handle or null.
uintptr_t psdcomp_matrix_dim(const struct PsdcompMatrix *matrix);

// Copies the entries row-major into `buffer`, which holds `len` doubles.
//
// # Safety
// `buffer` must be writable for `len` doubles.
enum PsdcompStatus psdcomp_matrix_data(const struct PsdcompMatrix *matrix,
                                       double *buffer,
                                       uintptr_t len);

// Composes a noun and a verb matrix with the rule named `rule`
// (for example `"traced-noun"`).
//
// # Safety
// Pointers must be valid; `rule` nul-terminated.
enum PsdcompStatus psdcomp_compose(const char *rule,
                                   const struct PsdcompMatrix *noun,
                                   const struct PsdcompMatrix *verb,
                                   struct PsdcompMatrix **out);

// Composes a whitespace-separated phrase of type `"sv"`, `"vo"` or `"svo"`
// from words in `store`.
//
// # Safety
// Pointers must be valid; strings nul-terminated.
enum PsdcompStatus psdcomp_compose_phrase(const struct PsdcompStore *store,
                                          const char *phrase_type,
                                          const char *rule,
                                          const char *phrase,
                                          struct PsdcompMatrix **out);

// Graded hyponymy of `a` under `b` with measure `"ke"`, `"kba"` or `"crisp"`.
//
// # Safety
// Pointers must be valid; `measure_id` nul-terminated.
enum PsdcompStatus psdcomp_score(const char *measure_id,
                                 const struct PsdcompMatrix *a,
                                 const struct PsdcompMatrix *b,
                                 double *out);

// ROC AUC of `scores` against `labels` (nonzero is positive).
//
// # Safety
// `scores` and `labels` must each hold `len` elements.
enum PsdcompStatus psdcomp_roc_auc(const double *scores,
                                   const uint8_t *labels,
                                   uintptr_t len,
                                   double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PSDCOMP_H */
