/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#ifndef RANKLASSO_H
#define RANKLASSO_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Match outcome codes for `rl_tournament_new`.
 */
#define RL_WIN_I 1

#define RL_TIE 0

#define RL_WIN_J -1

/**
 * Result of every fallible call.
 */
typedef enum RlStatus {
  RL_STATUS_OK = 0,
  RL_STATUS_NULL_POINTER = 1,
  RL_STATUS_INVALID_ARGUMENT = 2,
  RL_STATUS_INVALID_DATA = 3,
  RL_STATUS_IO = 4,
  RL_STATUS_DIVERGENT = 5,
  RL_STATUS_NOT_CONVERGED = 6,
  RL_STATUS_TOO_MANY_FAILURES = 7,
  /**
   * The output buffer is too small; the required length was written.
   */
  RL_STATUS_BUFFER_TOO_SMALL = 8,
  RL_STATUS_INTERNAL = 9,
} RlStatus;

/**
 * Which estimator `rl_fit` computes.
 */
typedef enum RlEstimator {
  RL_ESTIMATOR_MLE = 0,
  RL_ESTIMATOR_LASSO_AIC = 1,
  RL_ESTIMATOR_LASSO_BIC = 2,
  RL_ESTIMATOR_HYBRID_AIC = 3,
  RL_ESTIMATOR_HYBRID_BIC = 4,
} RlEstimator;

/**
 * One fitted estimator.
 */
typedef struct RlFit RlFit;

/**
 * A set of teams and their matches.
 */
typedef struct RlTournament RlTournament;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failure on this thread, or null. The pointer stays
 * valid until the next failing call on the same thread.
 */
const char *rl_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *rl_version(void);

/**
 * Reads a match file (header `team_i,team_j,venue,outcome`).
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` a valid pointer.
 */
enum RlStatus rl_tournament_load(const char *path, bool ties, struct RlTournament **out);

/**
 * Builds a tournament from arrays of length `n`: team indices `i` and `j`
 * into `names` (length `k`), venues (+1 home team i, 0 neutral, -1 home
 * team j) and outcomes (`RL_WIN_I`, `RL_TIE`, `RL_WIN_J`).
 *
 * # Safety
 * All arrays must hold the stated number of elements; each name must be a
 * NUL-terminated string.
 */
enum RlStatus rl_tournament_new(size_t k,
                                const char *const *names,
                                size_t n,
                                const size_t *team_i,
                                const size_t *team_j,
                                const int32_t *venues,
                                const int32_t *outcomes,
                                bool ties,
                                struct RlTournament **out);

/**
 * # Safety
 * `t` must come from this library and not be used afterwards; null is ignored.
 */
void rl_tournament_free(struct RlTournament *t);

/**
 * Number of teams, or 0 for a null handle.
 *
 * # Safety
 * `t` must be null or a live handle.
 */
size_t rl_tournament_team_count(const struct RlTournament *t);

/**
 * Number of matches, or 0 for a null handle.
 *
 * # Safety
 * `t` must be null or a live handle.
 */
size_t rl_tournament_match_count(const struct RlTournament *t);

/**
 * Copies the name of team `index` into `buf` (NUL-terminated). `*len` holds
 * the buffer size on entry and the required size, terminator included, on
 * return.
 *
 * # Safety
 * `t` must be a live handle, `len` valid and `buf` hold `*len` bytes (it may
 * be null when `*len` is 0).
 */
enum RlStatus rl_tournament_team_name(const struct RlTournament *t,
                                      size_t index,
                                      char *buf,
                                      size_t *len);

/**
 * Fits one estimator with default settings. Lasso-based estimators compute
 * the full regularization path.
 *
 * # Safety
 * `t` must be a live handle and `out` a valid pointer.
 */
enum RlStatus rl_fit(const struct RlTournament *t, enum RlEstimator estimator, struct RlFit **out);

/**
 * # Safety
 * `fit` must come from this library and not be used afterwards; null is ignored.
 */
void rl_fit_free(struct RlFit *fit);

/**
 * Copies the `len` team abilities (sum to zero) into `out`.
 *
 * # Safety
 * `fit` must be a live handle and `out` hold `len` doubles.
 */
enum RlStatus rl_fit_abilities(const struct RlFit *fit, double *out, size_t len);

/**
 * Home advantage on the log-odds scale.
 *
 * # Safety
 * `fit` must be a live handle and `out` a valid pointer.
 */
enum RlStatus rl_fit_home_advantage(const struct RlFit *fit, double *out);

/**
 * Tie threshold of the ties model; NaN for a binary tournament.
 *
 * # Safety
 * `fit` must be a live handle and `out` a valid pointer.
 */
enum RlStatus rl_fit_tie_threshold(const struct RlFit *fit, double *out);

/**
 * Selected penalty; NaN for maximum likelihood.
 *
 * # Safety
 * `fit` must be a live handle and `out` a valid pointer.
 */
enum RlStatus rl_fit_lambda(const struct RlFit *fit, double *out);

/**
 * Number of ability groups, or 0 for a null handle.
 *
 * # Safety
 * `fit` must be null or a live handle.
 */
size_t rl_fit_group_count(const struct RlFit *fit);

/**
 * Group of each team (0 = strongest) into `out` of length `len`.
 *
 * # Safety
 * `fit` must be a live handle and `out` hold `len` elements.
 */
enum RlStatus rl_fit_groups(const struct RlFit *fit, size_t *out, size_t len);

/**
 * Probability that team `i` beats team `j`; `venue` is +1 when `i` is at
 * home, 0 on neutral ground, -1 when `j` is at home.
 *
 * # Safety
 * `fit` must be a live handle and `out` a valid pointer.
 */
enum RlStatus rl_fit_win_probability(const struct RlFit *fit,
                                     size_t i,
                                     size_t j,
                                     int32_t venue_code,
                                     double *out);

/**
 * Parametric bootstrap of the probability that `i` beats `j` at the given
 * venue: writes the point estimate and the bias-corrected percentile
 * interval at `level`.
 *
 * # Safety
 * `t` must be a live handle and the output pointers valid.
 */
enum RlStatus rl_bootstrap_win_probability(const struct RlTournament *t,
                                           enum RlEstimator estimator,
                                           size_t i,
                                           size_t j,
                                           int32_t venue_code,
                                           size_t reps,
                                           uint64_t seed,
                                           double level,
                                           double *point,
                                           double *lower,
                                           double *upper);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* RANKLASSO_H */
