#ifndef POSSQ_H
#define POSSQ_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum PossqStatus {
  POSSQ_STATUS_OK = 0,
  POSSQ_STATUS_NULL_POINTER = 1,
  POSSQ_STATUS_INVALID_ARGUMENT = 2,
  /**
   * Output buffer length does not match the data.
   */
  POSSQ_STATUS_BUFFER_SIZE = 3,
  /**
   * Possibility mass below one; the water level does not exist.
   */
  POSSQ_STATUS_TOO_CONCENTRATED = 4,
  /**
   * Any other numerical or model failure.
   */
  POSSQ_STATUS_FAILURE = 5,
  /**
   * A Rust panic was caught at the boundary.
   */
  POSSQ_STATUS_PANIC = 6,
} PossqStatus;

typedef enum PossqFilterKind {
  POSSQ_FILTER_KIND_STANDARD = 0,
  POSSQ_FILTER_KIND_POSSIBILITY = 1,
} PossqFilterKind;

/**
 * Reports and aggregates of a Monte Carlo batch.
 */
typedef struct PossqBatch PossqBatch;

/**
 * Scenario and filter settings, edited key by key.
 */
typedef struct PossqScenario PossqScenario;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failure on this thread, or null if none.
 *
 * The pointer stays valid until the next failing call on this thread.
 */
const char *possq_last_error(void);

/**
 * Creates a scenario with all default settings.
 *
 * # Safety
 * `out` must be a valid pointer to writable storage for a handle.
 */
enum PossqStatus possq_scenario_new(struct PossqScenario **out);

/**
 * Sets one configuration key, e.g. `"scenario.scans"` to `"20"`.
 *
 * Keys and units are those of the command-line config file. On failure the
 * scenario is left unchanged.
 *
 * # Safety
 * `scenario` must come from [`possq_scenario_new`]; `key` and `value` must be
 * NUL-terminated strings.
 */
enum PossqStatus possq_scenario_set(struct PossqScenario *scenario,
                                    const char *key,
                                    const char *value);

/**
 * Number of scans in the scenario, or 0 for a null handle.
 *
 * # Safety
 * `scenario` must be null or come from [`possq_scenario_new`].
 */
size_t possq_scenario_scans(const struct PossqScenario *scenario);

/**
 * # Safety
 * `scenario` must be null or come from [`possq_scenario_new`], and not be
 * used afterwards.
 */
void possq_scenario_free(struct PossqScenario *scenario);

/**
 * Runs `runs` engagements with seeds `base_seed + i`. `filter` is a
 * [`PossqFilterKind`] value.
 *
 * # Safety
 * `scenario` must come from [`possq_scenario_new`]; `out` must be writable.
 */
enum PossqStatus possq_run_batch(const struct PossqScenario *scenario,
                                 uint32_t filter,
                                 size_t particles,
                                 size_t runs,
                                 uint64_t base_seed,
                                 size_t parallelism,
                                 struct PossqBatch **out);

/**
 * # Safety
 * `batch` must be null or come from [`possq_run_batch`].
 */
size_t possq_batch_runs(const struct PossqBatch *batch);

/**
 * # Safety
 * `batch` must be null or come from [`possq_run_batch`].
 */
size_t possq_batch_scans(const struct PossqBatch *batch);

/**
 * Number of divergent runs.
 *
 * # Safety
 * `batch` must be null or come from [`possq_run_batch`].
 */
size_t possq_batch_divergent(const struct PossqBatch *batch);

/**
 * Per-scan RMS position error over non-divergent runs (m); NaN when every
 * run diverged. `len` must equal [`possq_batch_scans`].
 *
 * # Safety
 * `batch` must come from [`possq_run_batch`]; `out` must hold `len` doubles.
 */
enum PossqStatus possq_batch_rms(const struct PossqBatch *batch, double *out, size_t len);

/**
 * Final-scan position error of every run (m), in run order. `len` must
 * equal [`possq_batch_runs`].
 *
 * # Safety
 * `batch` must come from [`possq_run_batch`]; `out` must hold `len` doubles.
 */
enum PossqStatus possq_batch_final_errors(const struct PossqBatch *batch, double *out, size_t len);

/**
 * # Safety
 * `batch` must be null or come from [`possq_run_batch`], and not be used
 * afterwards.
 */
void possq_batch_free(struct PossqBatch *batch);

/**
 * Cramér–Rao position bound per scan along the noise-free track (m).
 * `len` must equal [`possq_scenario_scans`].
 *
 * # Safety
 * `scenario` must come from [`possq_scenario_new`]; `out` must hold `len`
 * doubles.
 */
enum PossqStatus possq_crlb(const struct PossqScenario *scenario, double *out, size_t len);

/**
 * Water pouring of `n` discrete possibility values (maximum exactly one).
 * Writes the probability masses to `pmf` (length `n`) and the water level
 * to `level`.
 *
 * # Safety
 * `weights` and `pmf` must hold `n` doubles; `level` must be writable.
 */
enum PossqStatus possq_water_pour_discrete(const double *weights,
                                           size_t n,
                                           double *pmf,
                                           double *level);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* POSSQ_H */
