#ifndef SWLAB_H
#define SWLAB_H

#include <stddef.h>
#include <stdint.h>

/**
 * Status codes returned by every fallible call.
 */
typedef enum SwlabStatus {
  SWLAB_STATUS_OK = 0,
  SWLAB_STATUS_NULL_POINTER = 1,
  SWLAB_STATUS_INVALID_ARGUMENT = 2,
  SWLAB_STATUS_DATA_ERROR = 3,
  SWLAB_STATUS_NUMERICAL_ERROR = 4,
  SWLAB_STATUS_PANIC = 5,
} SwlabStatus;

/**
 * A solved model: parameters plus their state-space form.
 */
typedef struct SwlabModel SwlabModel;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *swlab_version(void);

/**
 * Message of the last failed call on this thread, or null. Valid until the
 * next failing call on the same thread.
 */
const char *swlab_last_error(void);

/**
 * Number of estimated parameters.
 */
size_t swlab_param_count(void);

/**
 * Name of estimated parameter `i` (static string), or null when out of range.
 */
const char *swlab_param_name(size_t i);

/**
 * Number of observable series (columns of every data buffer).
 */
size_t swlab_n_obs(void);

/**
 * Write the shipped posterior mode into `out` (length `len`, which must
 * equal `swlab_param_count()`).
 *
 * # Safety
 * `out` must point to `len` writable doubles.
 */
enum SwlabStatus swlab_posterior_mode(double *out, size_t len);

/**
 * Solve the model at `theta` (length `len`). Fails with
 * `NumericalError` unless a unique stable solution exists.
 *
 * # Safety
 * `theta` must point to `len` doubles and `out` to a writable handle slot.
 */
enum SwlabStatus swlab_model_new(const double *theta, size_t len, struct SwlabModel **out);

/**
 * Release a model handle. Null is ignored.
 *
 * # Safety
 * `model` must come from `swlab_model_new` and not be used afterwards.
 */
void swlab_model_free(struct SwlabModel *model);

/**
 * Number of model states.
 *
 * # Safety
 * `model` must be a live handle or null (returns 0).
 */
size_t swlab_model_n_states(const struct SwlabModel *model);

/**
 * Entropy rate (nats per time step) of the model's observables.
 *
 * # Safety
 * `model` must be a live handle and `out` writable.
 */
enum SwlabStatus swlab_model_entropy_rate(const struct SwlabModel *model, double *out);

/**
 * Gaussian negative log-likelihood of `n_rows` observations, stored row
 * by row with `swlab_n_obs()` columns in canonical series order.
 *
 * # Safety
 * `data` must point to `n_rows * swlab_n_obs()` doubles and `out` be writable.
 */
enum SwlabStatus swlab_model_nll(const struct SwlabModel *model,
                                 const double *data,
                                 size_t n_rows,
                                 double *out);

/**
 * Simulate `n_rows` observations after `burn_in` discarded steps into `out`
 * (row by row, `swlab_n_obs()` columns).
 *
 * # Safety
 * `out` must point to `n_rows * swlab_n_obs()` writable doubles.
 */
enum SwlabStatus swlab_model_simulate(const struct SwlabModel *model,
                                      size_t n_rows,
                                      size_t burn_in,
                                      uint64_t seed,
                                      double *out);

/**
 * Copy the model's parameters into `out` (length `swlab_param_count()`).
 *
 * # Safety
 * `out` must point to `len` writable doubles.
 */
enum SwlabStatus swlab_model_theta(const struct SwlabModel *model, double *out, size_t len);

/**
 * Estimation objective: NLL minus log prior. Never fails on a bad `theta`;
 * parameters outside the bounds or without a unique solution give the
 * penalty value (at least 1e10) instead.
 *
 * # Safety
 * `theta` must point to `len` doubles, `data` to `n_rows * swlab_n_obs()`
 * doubles and `out` be writable.
 */
enum SwlabStatus swlab_penalized_nll(const double *theta,
                                     size_t len,
                                     const double *data,
                                     size_t n_rows,
                                     double *out);

/**
 * Symbolic name of a status (static string).
 */
const char *swlab_status_name(enum SwlabStatus status);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SWLAB_H */
