#ifndef SPECLUST_H
#define SPECLUST_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum SpeclustStatus {
  SPECLUST_STATUS_OK = 0,
  SPECLUST_STATUS_NULL_POINTER = 1,
  SPECLUST_STATUS_INVALID_ARGUMENT = 2,
  SPECLUST_STATUS_DIMENSION_MISMATCH = 3,
  SPECLUST_STATUS_NON_FINITE = 4,
  SPECLUST_STATUS_NOT_SYMMETRIC = 5,
  SPECLUST_STATUS_ISOLATED_NODE = 6,
  SPECLUST_STATUS_NOT_CONVERGED = 7,
  SPECLUST_STATUS_BREAKDOWN = 8,
  SPECLUST_STATUS_DEGENERATE_INPUT = 9,
  SPECLUST_STATUS_IO = 10,
  SPECLUST_STATUS_PANIC = 11,
} SpeclustStatus;

typedef enum SpeclustRciState {
  SPECLUST_RCI_STATE_NEED_MATVEC = 0,
  SPECLUST_RCI_STATE_CONVERGED = 1,
  SPECLUST_RCI_STATE_FAILED = 2,
} SpeclustRciState;

// Opaque CSR matrix.
typedef struct SpeclustMatrix SpeclustMatrix;

// Opaque reverse-communication eigensolver session.
typedef struct SpeclustSession SpeclustSession;

// Eigensolver settings. `subspace = 0` selects the default dimension.
typedef struct SpeclustEigenConfig {
  size_t k;
  size_t subspace;
  double tol;
  size_t max_restarts;
  uint64_t seed;
} SpeclustEigenConfig;

typedef struct SpeclustKmeansConfig {
  size_t k;
  size_t max_iters;
  size_t n_init;
  uint64_t seed;
  // Uniformly chosen distinct points instead of k-means++ seeding.
  bool random_init;
} SpeclustKmeansConfig;

typedef struct SpeclustClusterConfig {
  size_t k;
  uint64_t seed;
  bool normalize_rows;
  // Drop zero-degree nodes instead of failing; they are labelled -1.
  bool remove_isolated;
  size_t kmeans_restarts;
} SpeclustClusterConfig;

// Computes `y = A x` for vectors of length `n`.
typedef void (*SpeclustApply)(void *user_data, const double *x, double *y, size_t n);

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread; empty after a success.
// Valid until the next call into this library on the same thread.
const char *speclust_last_error(void);

struct SpeclustEigenConfig speclust_eigen_config_default(size_t k);

struct SpeclustKmeansConfig speclust_kmeans_config_default(size_t k);

struct SpeclustClusterConfig speclust_cluster_config_default(size_t k);

// Builds a CSR matrix from `nnz` triplets. Duplicates are summed when
// `sum_duplicates` is true and rejected otherwise.
//
// # Safety
// `rows`, `cols` and `vals` must each point to `nnz` readable elements and
// `out` must be writable.
enum SpeclustStatus speclust_matrix_from_triplets(size_t n_rows,
                                                  size_t n_cols,
                                                  size_t nnz,
                                                  const size_t *rows,
                                                  const size_t *cols,
                                                  const double *vals,
                                                  bool sum_duplicates,
                                                  struct SpeclustMatrix **out);

// # Safety
// `m` must be null or a handle from this library that was not yet freed.
void speclust_matrix_free(struct SpeclustMatrix *m);

// # Safety
// `m` must be a live handle.
size_t speclust_matrix_n_rows(const struct SpeclustMatrix *m);

// # Safety
// `m` must be a live handle.
size_t speclust_matrix_n_cols(const struct SpeclustMatrix *m);

// # Safety
// `m` must be a live handle.
size_t speclust_matrix_nnz(const struct SpeclustMatrix *m);

// `y = M x`.
//
// # Safety
// `x` must hold `n_cols` and `y` `n_rows` elements.
enum SpeclustStatus speclust_matrix_spmv(const struct SpeclustMatrix *m,
                                         const double *x,
                                         double *y);

// Largest `cfg.k` eigenpairs of a symmetric matrix.
//
// # Safety
// `values` must hold `k` elements and `vectors` `n * k` (row-major, one
// eigenvector per column).
enum SpeclustStatus speclust_eigensolve(const struct SpeclustMatrix *m,
                                        const struct SpeclustEigenConfig *cfg,
                                        double *values,
                                        double *vectors);

// Starts a session for an `n`-dimensional operator.
//
// # Safety
// `cfg` must be readable and `out` writable.
enum SpeclustStatus speclust_session_new(size_t n,
                                         const struct SpeclustEigenConfig *cfg,
                                         struct SpeclustSession **out);

// # Safety
// `s` must be null or a session that was not yet freed.
void speclust_session_free(struct SpeclustSession *s);

// # Safety
// `s` must be a live session.
enum SpeclustRciState speclust_session_state(const struct SpeclustSession *s);

// # Safety
// `s` must be a live session.
size_t speclust_session_dim(const struct SpeclustSession *s);

// The `n` values to multiply by the operator. Valid until the next
// `speclust_session_advance`.
//
// # Safety
// `s` must be a live session.
const double *speclust_session_in_slot(const struct SpeclustSession *s);

// Where the `n` values of the product go before `speclust_session_advance`.
//
// # Safety
// `s` must be a live session.
double *speclust_session_out_slot(struct SpeclustSession *s);

// Consumes the out slot and moves the iteration forward.
//
// # Safety
// `s` must be a live session; `state` may be null.
enum SpeclustStatus speclust_session_advance(struct SpeclustSession *s,
                                             enum SpeclustRciState *state);

// Eigenpairs of a converged session. `apply` is called once per pair to
// measure the true residual.
//
// # Safety
// `values` must hold `k` elements, `vectors` `n * k`, and `residuals`
// (which may be null) `k`.
enum SpeclustStatus speclust_session_extract(const struct SpeclustSession *s,
                                             SpeclustApply apply,
                                             void *user_data,
                                             double *values,
                                             double *vectors,
                                             double *residuals);

// k-means on the rows of an `n × d` row-major point array.
//
// # Safety
// `points` must hold `n * d` elements, `labels` `n`; `sse` may be null.
enum SpeclustStatus speclust_kmeans(const double *points,
                                    size_t n,
                                    size_t d,
                                    const struct SpeclustKmeansConfig *cfg,
                                    size_t *labels,
                                    double *sse);

// Full spectral clustering of a similarity matrix.
//
// # Safety
// `labels` must hold `n` elements; removed isolated nodes get -1.
// `ncut_value` may be null.
enum SpeclustStatus speclust_cluster(const struct SpeclustMatrix *m,
                                     const struct SpeclustClusterConfig *cfg,
                                     int64_t *labels,
                                     double *ncut_value);

// Samples a stochastic block model. `labels` receives the planted block of
// each of the `sum(block_sizes)` nodes.
//
// # Safety
// `block_sizes` must hold `n_blocks` elements, `labels` the node count, and
// `out` must be writable.
enum SpeclustStatus speclust_sbm_generate(const size_t *block_sizes,
                                          size_t n_blocks,
                                          double p_in,
                                          double p_out,
                                          uint64_t seed,
                                          struct SpeclustMatrix **out,
                                          size_t *labels);

// Normalized cut of a `k`-way labeling.
//
// # Safety
// `labels` must hold one entry per matrix row and `out` be writable.
enum SpeclustStatus speclust_ncut(const struct SpeclustMatrix *m,
                                  const size_t *labels,
                                  size_t k,
                                  double *out);

// Adjusted Rand index of two labelings of `n` items.
//
// # Safety
// `a` and `b` must hold `n` elements and `out` be writable.
enum SpeclustStatus speclust_ari(const size_t *a, const size_t *b, size_t n, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SPECLUST_H */
