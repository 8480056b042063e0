#ifndef MACROSIM_H
#define MACROSIM_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of every fallible call.
 */
typedef enum MacrosimStatus {
  MACROSIM_STATUS_OK = 0,
  MACROSIM_STATUS_NULL_POINTER = 1,
  MACROSIM_STATUS_INVALID_UTF8 = 2,
  MACROSIM_STATUS_BAD_CONFIG = 3,
  MACROSIM_STATUS_SIMULATION = 4,
  MACROSIM_STATUS_INVALID_ARGUMENT = 5,
  /**
   * The output buffer is too short; the required length was written.
   */
  MACROSIM_STATUS_BUFFER_TOO_SMALL = 6,
  MACROSIM_STATUS_IO = 7,
  MACROSIM_STATUS_PANIC = 8,
} MacrosimStatus;

/**
 * Simulation parameters.
 */
typedef struct MacrosimConfig MacrosimConfig;

/**
 * A finished episode log.
 */
typedef struct MacrosimEpisode MacrosimEpisode;

/**
 * A simulation advanced one period at a time with the configured policies.
 */
typedef struct MacrosimSimulation MacrosimSimulation;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *macrosim_version(void);

/**
 * Message of the last failed call on this thread, or null if none. Valid
 * until the next failing call on the same thread.
 */
const char *macrosim_last_error_message(void);

void macrosim_clear_error(void);

/**
 * Built-in default configuration.
 *
 * # Safety
 * `out` must be a valid pointer to write a handle to.
 */
enum MacrosimStatus macrosim_config_default(struct MacrosimConfig **out);

/**
 * Parse and validate a TOML configuration.
 *
 * # Safety
 * `toml` must be a NUL-terminated string and `out` a valid pointer.
 */
enum MacrosimStatus macrosim_config_from_toml(const char *toml, struct MacrosimConfig **out);

/**
 * # Safety
 * `config` must come from this library and not be used afterwards; null
 * is ignored.
 */
void macrosim_config_free(struct MacrosimConfig *config);

/**
 * Simulate a whole episode with the configured policies.
 *
 * # Safety
 * `config` must be a live handle and `out` a valid pointer.
 */
enum MacrosimStatus macrosim_run_episode(const struct MacrosimConfig *config,
                                         uint64_t seed,
                                         struct MacrosimEpisode **out);

/**
 * # Safety
 * `episode` must come from this library and not be used afterwards; null
 * is ignored.
 */
void macrosim_episode_free(struct MacrosimEpisode *episode);

/**
 * Number of simulated periods.
 *
 * # Safety
 * `episode` must be a live handle and `out` a valid pointer.
 */
enum MacrosimStatus macrosim_episode_periods(const struct MacrosimEpisode *episode, uint32_t *out);

/**
 * Number of message kinds tracked by the kernel.
 */
size_t macrosim_message_kind_count(void);

/**
 * Static name of message kind `index`, or null when out of range.
 */
const char *macrosim_message_kind_name(size_t index);

/**
 * Messages of kind `index` over the episode; `index == kind count` gives
 * the total over all kinds.
 *
 * # Safety
 * `episode` must be a live handle and `out` a valid pointer.
 */
enum MacrosimStatus macrosim_episode_messages(const struct MacrosimEpisode *episode,
                                              size_t index,
                                              uint64_t *out);

/**
 * Real GDP per period. `written` receives the series length even when the
 * buffer is too small.
 *
 * # Safety
 * `out` must have room for `capacity` doubles; `written` must be valid.
 */
enum MacrosimStatus macrosim_episode_real_gdp(const struct MacrosimEpisode *episode,
                                              double *out,
                                              size_t capacity,
                                              size_t *written);

/**
 * Unemployment rate per period.
 *
 * # Safety
 * As for [`macrosim_episode_real_gdp`].
 */
enum MacrosimStatus macrosim_episode_unemployment(const struct MacrosimEpisode *episode,
                                                  double *out,
                                                  size_t capacity,
                                                  size_t *written);

/**
 * Write `<prefix>.csv` and `<prefix>.json` into `dir`.
 *
 * # Safety
 * `episode` must be a live handle; `dir` and `prefix` NUL-terminated.
 */
enum MacrosimStatus macrosim_episode_write(const struct MacrosimEpisode *episode,
                                           const char *dir,
                                           const char *prefix);

/**
 * Start a simulation that is advanced with [`macrosim_simulation_step`].
 *
 * # Safety
 * `config` must be a live handle and `out` a valid pointer.
 */
enum MacrosimStatus macrosim_simulation_new(const struct MacrosimConfig *config,
                                            uint64_t seed,
                                            struct MacrosimSimulation **out);

/**
 * Advance one period. `done` is set to 1 once the horizon is reached.
 *
 * # Safety
 * `sim` must be a live handle and `done` a valid pointer.
 */
enum MacrosimStatus macrosim_simulation_step(struct MacrosimSimulation *sim, uint8_t *done);

/**
 * Move the periods simulated so far into a new episode handle. The
 * simulation handle must still be freed and can no longer step.
 *
 * # Safety
 * `sim` must be a live handle and `out` a valid pointer.
 */
enum MacrosimStatus macrosim_simulation_finish(struct MacrosimSimulation *sim,
                                               struct MacrosimEpisode **out);

/**
 * # Safety
 * `sim` must come from this library and not be used afterwards; null is
 * ignored.
 */
void macrosim_simulation_free(struct MacrosimSimulation *sim);

/**
 * Gini coefficient of `len` values; negative values are shifted up first.
 *
 * # Safety
 * `values` must point to `len` doubles and `out` be valid.
 */
enum MacrosimStatus macrosim_gini(const double *values, size_t len, double *out);

/**
 * Band-pass cyclical component; the output is `2 * k` shorter than the
 * input.
 *
 * # Safety
 * `series` must point to `len` doubles, `out` have room for `capacity`
 * doubles and `written` be valid.
 */
enum MacrosimStatus macrosim_bandpass(const double *series,
                                      size_t len,
                                      double low,
                                      double high,
                                      size_t k,
                                      double *out,
                                      size_t capacity,
                                      size_t *written);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MACROSIM_H */
