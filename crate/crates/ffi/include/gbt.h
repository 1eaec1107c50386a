#ifndef GBT_H
#define GBT_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum GbtStatus {
  GBT_STATUS_OK = 0,
  GBT_STATUS_NULL_POINTER = 1,
  GBT_STATUS_INVALID_ARGUMENT = 2,
  GBT_STATUS_DEGENERATE_OBSERVABLE = 3,
  GBT_STATUS_NOT_NORMALIZED = 4,
  GBT_STATUS_INTERNAL = 5,
  GBT_STATUS_PANIC = 6,
} GbtStatus;

/**
 * Opaque protocol configuration.
 */
typedef struct GbtConfig GbtConfig;

/**
 * Opaque result of one teleportation run.
 */
typedef struct GbtReport GbtReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or null. The pointer
 * stays valid until the next `gbt_*` call on the same thread.
 */
const char *gbt_last_error(void);

/**
 * Static, NUL-terminated library version.
 */
const char *gbt_version(void);

/**
 * Builds a configuration. `amps` holds `n_amps` complex amplitudes and
 * `n_amps` must equal `d`. With `n_eigenvalues == 0` the observable takes
 * the descending eigenvalues `d² - 1, .., 0`; otherwise `eigenvalues`
 * lists one value per Bell state in flat order. A non-normalized input is
 * rejected unless `normalize` is set.
 *
 * # Safety
 * Array arguments must be readable for their stated lengths and `out`
 * must be writable.
 */
enum GbtStatus gbt_config_new(size_t d,
                              const double *amps,
                              size_t n_amps,
                              size_t resource_m,
                              size_t resource_n,
                              const double *eigenvalues,
                              size_t n_eigenvalues,
                              bool normalize,
                              uint64_t seed,
                              struct GbtConfig **out);

/**
 * The standard qubit (`d = 2`) or qutrit (`d = 3`) protocol.
 *
 * # Safety
 * As for [`gbt_config_new`].
 */
enum GbtStatus gbt_config_standard(size_t d,
                                   const double *amps,
                                   size_t n_amps,
                                   uint64_t seed,
                                   struct GbtConfig **out);

/**
 * # Safety
 * `config` must come from this library.
 */
enum GbtStatus gbt_config_set_seed(struct GbtConfig *config, uint64_t seed);

/**
 * # Safety
 * `config` must come from this library and not be used afterwards.
 * Null is ignored.
 */
void gbt_config_free(struct GbtConfig *config);

/**
 * Runs the protocol once with the configuration's seed.
 *
 * # Safety
 * `config` must come from this library and `out` must be writable.
 */
enum GbtStatus gbt_teleport(const struct GbtConfig *config, struct GbtReport **out);

/**
 * # Safety
 * `report` must come from this library and `out` must be writable.
 */
enum GbtStatus gbt_report_fidelity(const struct GbtReport *report, double *out);

/**
 * Alice's message as a flat Bell index in `1..=d²`.
 *
 * # Safety
 * `report` must come from this library and `out` must be writable.
 */
enum GbtStatus gbt_report_message(const struct GbtReport *report, size_t *out);

/**
 * # Safety
 * `report` must come from this library and `out` must be writable.
 */
enum GbtStatus gbt_report_success(const struct GbtReport *report, bool *out);

/**
 * Copies Bob's corrected state into `buf` as `d` interleaved complex
 * values. `capacity` counts doubles and must be at least `2 * d`.
 *
 * # Safety
 * `buf` must be writable for `capacity` doubles.
 */
enum GbtStatus gbt_report_bob_state(const struct GbtReport *report, double *buf, size_t capacity);

/**
 * The full report as JSON. Release with [`gbt_string_free`].
 *
 * # Safety
 * `report` must come from this library and `out` must be writable.
 */
enum GbtStatus gbt_report_to_json(const struct GbtReport *report, char **out);

/**
 * # Safety
 * `report` must come from this library and not be used afterwards.
 * Null is ignored.
 */
void gbt_report_free(struct GbtReport *report);

/**
 * Runs every verification suite at dimension `d`. Writes the number of
 * failed checks to `failed`. When `json` is not null it receives one JSON
 * object per check, newline separated; release it with
 * [`gbt_string_free`].
 *
 * # Safety
 * `failed` must be writable; `json` must be null or writable.
 */
enum GbtStatus gbt_verify_all(size_t d, uint64_t seed, size_t *failed, char **json);

/**
 * # Safety
 * `s` must be a string returned by this library, or null.
 */
void gbt_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* GBT_H */
