#ifndef GLU_H
#define GLU_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum GluStatus {
  GLU_STATUS_OK = 0,
  GLU_STATUS_NULL_POINTER = 1,
  GLU_STATUS_INVALID_ARGUMENT = 2,
  GLU_STATUS_DIMENSION = 3,
  GLU_STATUS_RANK_DEFICIENT = 4,
  GLU_STATUS_NON_FINITE = 5,
  GLU_STATUS_CONVERGENCE = 6,
  GLU_STATUS_TINY_PIVOT = 7,
  GLU_STATUS_IO = 8,
  GLU_STATUS_PARSE = 9,
  GLU_STATUS_PANIC = 99,
} GluStatus;

// Values accepted by the `algo` argument of [`glu_factorize`].
typedef enum GluAlgorithm {
  GLU_ALGORITHM_GLU = 0,
  GLU_ALGORITHM_RLU = 1,
  GLU_ALGORITHM_RQR = 2,
  GLU_ALGORITHM_PRR_RLU = 3,
  GLU_ALGORITHM_CW = 4,
} GluAlgorithm;

// Values accepted by the sketch-kind arguments of [`glu_factorize`].
typedef enum GluSketchKind {
  GLU_SKETCH_KIND_SRHT = 0,
  GLU_SKETCH_KIND_GAUSSIAN = 1,
  GLU_SKETCH_KIND_HAAR = 2,
  GLU_SKETCH_KIND_ROW_SELECTION = 3,
} GluSketchKind;

// Opaque factorization `A_k = T * core * S`.
typedef struct GluFactorization GluFactorization;

// Opaque dense matrix.
typedef struct GluMatrix GluMatrix;

typedef struct GluDims {
  size_t m;
  size_t n;
  size_t k;
  size_t l;
  size_t lp;
} GluDims;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the last failed call on this thread; empty after a success.
// Valid until the next call into this library from the same thread.
const char *glu_last_error_message(void);

// Library version as a static NUL-terminated string.
const char *glu_version(void);

// Copies `rows * cols` column-major values into a new matrix.
//
// # Safety
// `data` must point to `rows * cols` doubles (it may be null when that
// product is zero) and `out` must be writable.
enum GluStatus glu_matrix_new(size_t rows, size_t cols, const double *data, struct GluMatrix **out);

// # Safety
// `m` must be null or a live matrix handle.
size_t glu_matrix_rows(const struct GluMatrix *m);

// # Safety
// `m` must be null or a live matrix handle.
size_t glu_matrix_cols(const struct GluMatrix *m);

// Writes the entries column-major into `out`, which holds `len` doubles;
// `len` must equal rows * cols.
//
// # Safety
// `m` must be a live handle and `out` must be writable for `len` doubles.
enum GluStatus glu_matrix_copy_data(const struct GluMatrix *m, double *out, size_t len);

// # Safety
// `m` must be null or a handle not yet freed.
void glu_matrix_free(struct GluMatrix *m);

// Reads a `.mtx` (Matrix Market array) or `.glum`/`.bin` file.
//
// # Safety
// `path` must be a NUL-terminated string and `out` writable.
enum GluStatus glu_matrix_read(const char *path, struct GluMatrix **out);

// Writes a matrix; the format follows the file extension.
//
// # Safety
// `m` must be a live handle and `path` a NUL-terminated string.
enum GluStatus glu_matrix_write(const struct GluMatrix *m, const char *path);

// `U diag(sigma) V^T` with Haar factors and a spectrum given as
// `exp:RATE`, `poly:POWER`, `step:K:GAP` or `noisy:K:NOISE`.
//
// # Safety
// `spectrum` must be a NUL-terminated string and `out` writable.
enum GluStatus glu_gen_matrix(const char *spectrum,
                              size_t m,
                              size_t n,
                              uint64_t seed,
                              struct GluMatrix **out);

// Runs `algo` (a [`GluAlgorithm`] value) with target rank `k` and sketch
// sizes `l`, `lp`; `lp` is ignored by RLU, RQR and PRR_RLU. `left` and
// `right` are [`GluSketchKind`] values.
//
// # Safety
// `a` must be a live matrix handle and `out` writable.
enum GluStatus glu_factorize(const struct GluMatrix *a,
                             uint32_t algo,
                             size_t k,
                             size_t l,
                             size_t lp,
                             uint32_t left,
                             uint32_t right,
                             uint64_t seed,
                             struct GluFactorization **out);

// # Safety
// `f` must be a live factorization handle and `out` writable.
enum GluStatus glu_factorization_dims(const struct GluFactorization *f, struct GluDims *out);

// Dense `A_k` as a new matrix.
//
// # Safety
// `f` must be a live factorization handle and `out` writable.
enum GluStatus glu_factorization_reconstruct(const struct GluFactorization *f,
                                             struct GluMatrix **out);

// Copy of the left factor `T`.
//
// # Safety
// `f` must be a live factorization handle and `out` writable.
enum GluStatus glu_factorization_t(const struct GluFactorization *f, struct GluMatrix **out);

// Copy of the right factor `S`.
//
// # Safety
// `f` must be a live factorization handle and `out` writable.
enum GluStatus glu_factorization_s(const struct GluFactorization *f, struct GluMatrix **out);

// `y = A_k x` with `x` of length n and `y` of length m.
//
// # Safety
// `x` must hold `x_len` doubles and `y` must be writable for `y_len`.
enum GluStatus glu_factorization_apply(const struct GluFactorization *f,
                                       const double *x,
                                       size_t x_len,
                                       double *y,
                                       size_t y_len);

// # Safety
// `f` must be null or a handle not yet freed.
void glu_factorization_free(struct GluFactorization *f);

// `||A - A_k||_2 / sigma_{k+1}(A)`. Writes NaN when `sigma_{k+1}(A)` is
// numerically zero (exact recovery).
//
// # Safety
// `a`, `ak` must be live handles and `out` writable.
enum GluStatus glu_gamma_lowrank(const struct GluMatrix *a,
                                 const struct GluMatrix *ak,
                                 size_t k,
                                 double *out);

// Growth factors of elimination without pivoting on a square matrix.
//
// # Safety
// `a` must be a live handle; `rho_u`, `rho_l` writable.
enum GluStatus glu_growth_factors(const struct GluMatrix *a, double *rho_u, double *rho_l);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* GLU_H */
