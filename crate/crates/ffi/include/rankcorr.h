/* C interface to the rankcorr library. Generated by cbindgen; do not edit. */

#ifndef RANKCORR_H
#define RANKCORR_H

/* Regenerate with `cargo build -p rankcorr-ffi`. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every C entry point.
 */
typedef enum RcStatus {
  RC_STATUS_OK = 0,
  RC_STATUS_NULL_POINTER = 1,
  RC_STATUS_INVALID_UTF8 = 2,
  RC_STATUS_LENGTH_MISMATCH = 3,
  RC_STATUS_TOO_SHORT = 4,
  RC_STATUS_NON_FINITE = 5,
  RC_STATUS_DEGENERATE_VARIANCE = 6,
  RC_STATUS_TIES_PRESENT = 7,
  RC_STATUS_INVALID_CONFIG = 8,
  RC_STATUS_LABEL_CONFLICT = 9,
  RC_STATUS_DUPLICATE_ID = 10,
  RC_STATUS_PARSE_ERROR = 11,
  RC_STATUS_IO_ERROR = 12,
  RC_STATUS_DIVERGENCE = 13,
} RcStatus;

/**
 * Opaque memory bank handle.
 */
typedef struct RcBank RcBank;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Static description of a status code.
 */
const char *rc_status_message(enum RcStatus status);

/**
 * Library version as a static NUL-terminated string.
 */
const char *rc_version(void);

/**
 * Pearson linear correlation of two length-`len` vectors.
 *
 * # Safety
 * `a` and `b` must point to `len` readable doubles; `out` must be
 * writable.
 */
enum RcStatus rc_plcc(const double *a, const double *b, size_t len, double *out);

/**
 * Spearman rank-order correlation (fractional ranks, tie-aware).
 *
 * # Safety
 * `q` and `qhat` must point to `len` readable doubles; `out` writable.
 */
enum RcStatus rc_srocc(const double *q, const double *qhat, size_t len, double *out);

/**
 * Closed-form Spearman correlation from squared rank differences;
 * requires tie-free inputs.
 *
 * # Safety
 * `q` and `qhat` must point to `len` readable doubles; `out` writable.
 */
enum RcStatus rc_srocc_closed_form(const double *q, const double *qhat, size_t len, double *out);

/**
 * Fractional hard ranks of `x` into `out_ranks` (length `len`).
 *
 * # Safety
 * `x` must point to `len` readable doubles; `out_ranks` to `len` writable
 * doubles.
 */
enum RcStatus rc_hard_rank(const double *x, size_t len, double *out_ranks);

/**
 * Smooth ranks of `x` at steepness `k` into `out_ranks` (length `len`).
 * Pass `eps <= 0` to use the default guard threshold.
 *
 * # Safety
 * `x` must point to `len` readable doubles; `out_ranks` to `len` writable
 * doubles.
 */
enum RcStatus rc_soft_rank(const double *x, size_t len, double k, double eps, double *out_ranks);

/**
 * Dense Jacobian of the smooth ranks, row-major into `out_jacobian`
 * (length `len * len`).
 *
 * # Safety
 * `x` must point to `len` readable doubles; `out_jacobian` to `len * len`
 * writable doubles.
 */
enum RcStatus rc_soft_rank_jacobian(const double *x,
                                    size_t len,
                                    double k,
                                    double eps,
                                    double *out_jacobian);

/**
 * Monotonicity loss of predictions `qhat` against ground truth `q`.
 *
 * `grad_mask` may be NULL (all entries live) or point to `len` bytes where
 * non-zero marks a live entry. `out_grad` may be NULL when the gradient is
 * not wanted; `out_degenerate` may be NULL.
 *
 * # Safety
 * All non-NULL pointers must reference buffers of `len` elements.
 */
enum RcStatus rc_mono_loss(const double *qhat,
                           const double *q,
                           const uint8_t *grad_mask,
                           size_t len,
                           double k,
                           double eps,
                           double *out_loss,
                           double *out_grad,
                           bool *out_degenerate);

/**
 * Pairwise margin ranking loss, with the comparison sign taken from the
 * predicted order unless `ground_truth_order` is set.
 *
 * # Safety
 * `qhat` and `q` must point to `len` readable doubles; `out_grad`, when
 * non-NULL, to `len` writable doubles.
 */
enum RcStatus rc_margin_rank_loss(const double *qhat,
                                  const double *q,
                                  size_t len,
                                  bool ground_truth_order,
                                  double *out_loss,
                                  double *out_grad);

/**
 * Euclidean projection of `-x / beta` onto the permutahedron of
 * `{1, .., len}`.
 *
 * # Safety
 * `x` must point to `len` readable doubles; `out` to `len` writable
 * doubles.
 */
enum RcStatus rc_permutahedron_project(const double *x, size_t len, double beta, double *out);

/**
 * Ordered pairwise evaluations behind a full smooth rank vector.
 */
uint64_t rc_mono_loss_cost(size_t n);

/**
 * Ordered pair evaluations of the margin loss.
 */
uint64_t rc_margin_loss_cost(size_t n);

/**
 * Creates a memory bank retaining entries for the last `retention_epochs`
 * epochs. Returns NULL when `retention_epochs` is zero.
 */
struct RcBank *rc_bank_new(uint64_t retention_epochs);

/**
 * Frees a bank created by [`rc_bank_new`] or [`rc_bank_load`]. NULL is
 * ignored.
 *
 * # Safety
 * `bank` must be a pointer previously returned by this library and not
 * yet freed.
 */
void rc_bank_free(struct RcBank *bank);

/**
 * Number of samples currently stored; 0 for NULL.
 *
 * # Safety
 * `bank` must be NULL or a live handle from this library.
 */
size_t rc_bank_len(const struct RcBank *bank);

/**
 * Records a batch of `len` samples at `epoch`.
 *
 * # Safety
 * `ids` must point to `len` NUL-terminated strings; `preds` and `mos` to
 * `len` readable doubles; `bank` must be a live handle.
 */
enum RcStatus rc_bank_update(struct RcBank *bank,
                             const char *const *ids,
                             const double *preds,
                             const double *mos,
                             size_t len,
                             uint64_t epoch);

/**
 * Evicts entries older than the retention horizon at `current_epoch`.
 *
 * # Safety
 * `bank` must be a live handle.
 */
enum RcStatus rc_bank_evict(struct RcBank *bank, uint64_t current_epoch);

/**
 * Size of the union that [`rc_bank_mono_loss`] would evaluate for a batch
 * of `len` ids: `len` plus the bank entries not in the batch.
 *
 * # Safety
 * `bank` must be a live handle; `ids` must point to `len` NUL-terminated
 * strings; `out_len` must be writable.
 */
enum RcStatus rc_bank_assembled_len(const struct RcBank *bank,
                                    const char *const *ids,
                                    size_t len,
                                    size_t *out_len);

/**
 * Monotonicity loss of the current batch assembled with the bank: bank
 * entries join as gradient-free constants, and `out_grad` (length `len`,
 * may be NULL) receives the gradient for the batch entries only. The bank
 * itself is not modified; call [`rc_bank_update`] afterwards to record
 * the batch.
 *
 * # Safety
 * `ids` must point to `len` NUL-terminated strings; `preds` and `mos` to
 * `len` readable doubles; `out_grad`, when non-NULL, to `len` writable
 * doubles; `bank` must be a live handle.
 */
enum RcStatus rc_bank_mono_loss(const struct RcBank *bank,
                                const char *const *ids,
                                const double *preds,
                                const double *mos,
                                size_t len,
                                double k,
                                double eps,
                                double *out_loss,
                                double *out_grad,
                                bool *out_degenerate);

/**
 * Saves the bank to `path` in the line-oriented text format.
 *
 * # Safety
 * `bank` must be a live handle; `path` a NUL-terminated string.
 */
enum RcStatus rc_bank_save(const struct RcBank *bank, const char *path);

/**
 * Loads a bank saved by [`rc_bank_save`]. On success writes a fresh
 * handle to `out_bank`.
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out_bank` must be writable.
 */
enum RcStatus rc_bank_load(const char *path, uint64_t retention_epochs, struct RcBank **out_bank);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* RANKCORR_H */
