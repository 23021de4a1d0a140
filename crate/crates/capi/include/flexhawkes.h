/* C interface to the flexhawkes library. Generated by cbindgen; do not edit. */

#ifndef FLEXHAWKES_H
#define FLEXHAWKES_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Residual distribution family selector for simulation and fitting.
 */
typedef enum FhResidualFamily {
  FH_RESIDUAL_FAMILY_EXPONENTIAL = 0,
  FH_RESIDUAL_FAMILY_GAMMA = 1,
  FH_RESIDUAL_FAMILY_TRAPEZOID_EXP = 2,
} FhResidualFamily;

/**
 * Status code returned by every fallible function.
 */
typedef enum FhStatus {
  FH_STATUS_OK = 0,
  FH_STATUS_NULL_POINTER = 1,
  FH_STATUS_INVALID_ARGUMENT = 2,
  FH_STATUS_NUMERICAL_ERROR = 3,
  FH_STATUS_INSUFFICIENT_DATA = 4,
  FH_STATUS_IO_ERROR = 5,
} FhStatus;

/**
 * Opaque fit report handle.
 */
typedef struct FhFit FhFit;

/**
 * Opaque event series handle.
 */
typedef struct FhSeries FhSeries;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Crate version as a static NUL-terminated string.
 */
const char *fh_version(void);

/**
 * Message for the most recent failure on this thread. The pointer stays
 * valid until the next failing call on the same thread.
 */
const char *fh_last_error(void);

/**
 * Free a string returned by this library.
 *
 * # Safety
 * `s` must have been returned by a flexhawkes function and not yet freed.
 */
void fh_string_free(char *s);

/**
 * Build an event series from parallel arrays. `types` and `marks` may be
 * NULL (all-zero types, no marks).
 *
 * # Safety
 * `times` (and `types`/`marks` when non-NULL) must point to `len` readable
 * elements; `out` must be a valid pointer.
 */
enum FhStatus fh_series_new(const double *times,
                            const uint32_t *types,
                            const double *marks,
                            size_t len,
                            struct FhSeries **out);

/**
 * # Safety
 * `series` must be a live handle from this library (or NULL).
 */
void fh_series_free(struct FhSeries *series);

/**
 * # Safety
 * `series` must be a live handle.
 */
size_t fh_series_len(const struct FhSeries *series);

/**
 * Copy event data into caller buffers; any destination may be NULL to skip
 * that column. Buffers must hold `fh_series_len` elements.
 *
 * # Safety
 * Non-NULL destinations must point to at least `fh_series_len(series)`
 * writable elements.
 */
enum FhStatus fh_series_copy(const struct FhSeries *series,
                             double *times_out,
                             uint32_t *types_out,
                             double *marks_out);

/**
 * Read a `time,type,mark` CSV into a new series handle.
 *
 * # Safety
 * `path` must be a NUL-terminated string, `out` a valid pointer.
 */
enum FhStatus fh_series_read_csv(const char *path, struct FhSeries **out);

/**
 * Write the series as `time,type,mark` CSV.
 *
 * # Safety
 * `series` must be a live handle, `path` a NUL-terminated string.
 */
enum FhStatus fh_series_write_csv(const struct FhSeries *series, const char *path);

/**
 * Simulate `n_events` events of the univariate process. Pass NaN as
 * `lambda0` to start at the baseline `mu`.
 *
 * # Safety
 * `family_params` must point to `n_family_params` readable doubles (may be
 * NULL when the count is zero); `out` must be valid.
 */
enum FhStatus fh_simulate(double mu,
                          double alpha,
                          double beta,
                          enum FhResidualFamily family,
                          const double *family_params,
                          size_t n_family_params,
                          double lambda0,
                          size_t n_events,
                          uint64_t seed,
                          struct FhSeries **out);

/**
 * Infer residuals at the given parameters. The required length (one per
 * event) is always written to `written`; data is copied when `cap`
 * suffices. Pass NaN as `lambda0` for the default `mu`.
 *
 * # Safety
 * `series` must be live; `out` must hold `cap` writable doubles when
 * non-NULL; `written` must be valid.
 */
enum FhStatus fh_infer_residuals(const struct FhSeries *series,
                                 double mu,
                                 double alpha,
                                 double beta,
                                 double lambda0,
                                 double *out,
                                 size_t cap,
                                 size_t *written);

/**
 * Joint maximum-likelihood fit of the univariate model.
 *
 * # Safety
 * `series` must be live, `out` valid.
 */
enum FhStatus fh_mle_fit(const struct FhSeries *series,
                         enum FhResidualFamily family,
                         struct FhFit **out);

/**
 * Exponential quasi-MLE (standard Hawkes likelihood).
 *
 * # Safety
 * `series` must be live, `out` valid.
 */
enum FhStatus fh_qmle_fit(const struct FhSeries *series, struct FhFit **out);

/**
 * Two-step GMM fit of the excitation parameters.
 *
 * # Safety
 * `series` must be live, `out` valid.
 */
enum FhStatus fh_gmm_fit(const struct FhSeries *series, struct FhFit **out);

/**
 * # Safety
 * `fit` must be a live handle from this library (or NULL).
 */
void fh_fit_free(struct FhFit *fit);

/**
 * Look up a named estimate (`"mu"`, `"alpha"`, `"beta"`, `"shape"`, ...).
 *
 * # Safety
 * `fit` must be live; `name` NUL-terminated; `out` valid.
 */
enum FhStatus fh_fit_estimate(const struct FhFit *fit, const char *name, double *out);

/**
 * Look up a named standard error.
 *
 * # Safety
 * `fit` must be live; `name` NUL-terminated; `out` valid.
 */
enum FhStatus fh_fit_std_error(const struct FhFit *fit, const char *name, double *out);

/**
 * Objective value at the optimum (log-likelihood, or negated GMM
 * criterion).
 *
 * # Safety
 * `fit` must be live.
 */
double fh_fit_objective(const struct FhFit *fit);

/**
 * # Safety
 * `fit` must be live.
 */
bool fh_fit_converged(const struct FhFit *fit);

/**
 * Residuals inferred at the optimum for one event type (0 for univariate
 * fits). Query-then-fill like [`fh_infer_residuals`].
 *
 * # Safety
 * `fit` must be live; `out` must hold `cap` doubles when non-NULL;
 * `written` must be valid.
 */
enum FhStatus fh_fit_residuals(const struct FhFit *fit,
                               size_t type_index,
                               double *out,
                               size_t cap,
                               size_t *written);

/**
 * Full report as a JSON string; free with [`fh_string_free`].
 *
 * # Safety
 * `fit` must be live, `out` valid.
 */
enum FhStatus fh_fit_json(const struct FhFit *fit, char **out);

/**
 * Closed-form Hawkes volatility for the bivariate model over `horizon`.
 * `alpha` is row-major 2x2; mark moments are per-type means and second
 * moments. `centered` selects the covariance reading of the second-moment
 * equation (recommended).
 *
 * # Safety
 * `mu`, `beta`, `mark_mean`, `mark_second` must each point to 2 readable
 * doubles and `alpha` to 4; `out` must be valid.
 */
enum FhStatus fh_hawkes_vol(const double *mu,
                            const double *alpha,
                            const double *beta,
                            const double *mark_mean,
                            const double *mark_second,
                            double horizon,
                            bool centered,
                            double *out);

/**
 * Sparse-observation preprocessing of a price tape given as parallel
 * `times`/`prices` arrays plus the price before the first change. The
 * number of recorded events is always written to `written`; times and
 * prices are copied when `cap` suffices.
 *
 * # Safety
 * `times` and `prices` must point to `len` readable doubles; non-NULL
 * outputs must hold `cap` writable doubles; `written` must be valid.
 */
enum FhStatus fh_sparsify(const double *times,
                          const double *prices,
                          size_t len,
                          double initial_price,
                          double dt,
                          double *out_times,
                          double *out_prices,
                          size_t cap,
                          size_t *written);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* FLEXHAWKES_H */
