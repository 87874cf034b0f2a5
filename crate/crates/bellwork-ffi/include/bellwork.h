/* bellwork C API. Generated by cbindgen; regenerate with `cargo build -p bellwork-ffi`. */

#ifndef BELLWORK_H
#define BELLWORK_H

#include <stdint.h>
#include <stdbool.h>
#include <stddef.h>

/**
 * Status codes returned by every fallible call.
 */
typedef enum BwStatus {
  BW_STATUS_OK = 0,
  BW_STATUS_NULL_POINTER = 1,
  BW_STATUS_INVALID_ARGUMENT = 2,
  BW_STATUS_SIZE_LIMIT = 3,
  BW_STATUS_MISSING_PARAMETER = 4,
  BW_STATUS_INCONSISTENT_MARGINAL = 5,
  BW_STATUS_DEGENERATE_CALIBRATION = 6,
  BW_STATUS_PARSE_ERROR = 7,
  BW_STATUS_IO_ERROR = 8,
  BW_STATUS_INVALID_UTF8 = 9,
  /**
   * The requested value is not defined for this input (for example a
   * closed-form quantum value of an untagged game).
   */
  BW_STATUS_NOT_AVAILABLE = 10,
  BW_STATUS_INTERNAL_PANIC = 11,
} BwStatus;

/**
 * Confidence-bound constructions selectable through the C API.
 */
typedef enum BwMethod {
  BW_METHOD_HOEFFDING = 0,
  BW_METHOD_AZUMA = 1,
  BW_METHOD_CLOPPER_PEARSON = 2,
  BW_METHOD_WILSON = 3,
} BwMethod;

/**
 * Opaque behaviour handle.
 */
typedef struct BwBehavior BwBehavior;

/**
 * Opaque XOR game handle.
 */
typedef struct BwGame BwGame;

/**
 * Opaque work-record handle.
 */
typedef struct BwWorkRecord BwWorkRecord;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Create the CHSH game.
 *
 * # Safety
 * `out` must be NULL or writable.
 */
enum BwStatus bw_game_chsh(struct BwGame **out);

/**
 * Create the N-cycle chained game (N >= 2).
 *
 * # Safety
 * `out` must be NULL or writable.
 */
enum BwStatus bw_game_chained(uint32_t n, struct BwGame **out);

/**
 * Parse a game from its JSON schema.
 *
 * # Safety
 * `json` must be NULL or a valid NUL-terminated string; `out` must be
 * NULL or writable.
 */
enum BwStatus bw_game_from_json(const char *json, struct BwGame **out);

/**
 * Release a game handle. NULL is a no-op.
 *
 * # Safety
 * `game` must be NULL or a handle returned by this library, not yet freed.
 */
void bw_game_free(struct BwGame *game);

/**
 * The game's name tag as a new string (free with `bw_string_free`).
 *
 * # Safety
 * `game` must be NULL or a live handle; `out` must be NULL or writable.
 */
enum BwStatus bw_game_name(const struct BwGame *game, char **out);

/**
 * Exact local value by deterministic-strategy enumeration.
 *
 * # Safety
 * `game` must be NULL or a live handle; `out` must be NULL or writable.
 */
enum BwStatus bw_game_local_value(const struct BwGame *game, double *out);

/**
 * Nonsignalling value (always 1 for XOR games).
 *
 * # Safety
 * `game` must be NULL or a live handle; `out` must be NULL or writable.
 */
enum BwStatus bw_game_ns_value(const struct BwGame *game, double *out);

/**
 * Closed-form quantum value for CHSH / chained games;
 * `BW_STATUS_NOT_AVAILABLE` for untagged games.
 *
 * # Safety
 * `game` must be NULL or a live handle; `out` must be NULL or writable.
 */
enum BwStatus bw_game_quantum_closed(const struct BwGame *game, double *out);

/**
 * Ascent lower bound on the quantum value. `out_converged` may be NULL.
 *
 * # Safety
 * `game` must be NULL or a live handle; `out` and `out_converged` must be
 * NULL or writable.
 */
enum BwStatus bw_game_quantum_lower(const struct BwGame *game,
                                    uint32_t restarts,
                                    double tol,
                                    double *out,
                                    bool *out_converged);

/**
 * The PR box on CHSH labels.
 *
 * # Safety
 * `out` must be NULL or writable.
 */
enum BwStatus bw_behavior_pr(struct BwBehavior **out);

/**
 * The Tsirelson-optimal CHSH behaviour.
 *
 * # Safety
 * `out` must be NULL or writable.
 */
enum BwStatus bw_behavior_tsirelson(struct BwBehavior **out);

/**
 * The all-zeros deterministic box on the game's question sets.
 *
 * # Safety
 * `game` must be NULL or a live handle; `out` must be NULL or writable.
 */
enum BwStatus bw_behavior_local_zeros(const struct BwGame *game, struct BwBehavior **out);

/**
 * The noisy-PR mixture (1 - eps) PR + eps local.
 *
 * # Safety
 * `out` must be NULL or writable.
 */
enum BwStatus bw_behavior_noisy_pr(double eps, struct BwBehavior **out);

/**
 * The quantum-optimal chained behaviour for N >= 2.
 *
 * # Safety
 * `out` must be NULL or writable.
 */
enum BwStatus bw_behavior_chained_quantum(uint32_t n, struct BwBehavior **out);

/**
 * Parse a behaviour from its JSON schema (full table or correlators).
 *
 * # Safety
 * `json` must be NULL or a valid NUL-terminated string; `out` must be
 * NULL or writable.
 */
enum BwStatus bw_behavior_from_json(const char *json, struct BwBehavior **out);

/**
 * Release a behaviour handle. NULL is a no-op.
 *
 * # Safety
 * `behavior` must be NULL or a handle returned by this library, not yet
 * freed.
 */
void bw_behavior_free(struct BwBehavior *behavior);

/**
 * Success probability of a behaviour on a game.
 *
 * # Safety
 * Handles must be NULL or live; `out` must be NULL or writable.
 */
enum BwStatus bw_success_probability(const struct BwGame *game,
                                     const struct BwBehavior *behavior,
                                     double *out);

/**
 * CHSH value S of a CHSH-labeled behaviour.
 *
 * # Safety
 * `behavior` must be NULL or a live handle; `out` must be NULL or
 * writable.
 */
enum BwStatus bw_chsh_value(const struct BwBehavior *behavior, double *out);

/**
 * Exact mean banked work per round, by transcript enumeration.
 *
 * # Safety
 * Handles must be NULL or live; `out` must be NULL or writable.
 */
enum BwStatus bw_exact_work_mean(const struct BwGame *game,
                                 const struct BwBehavior *behavior,
                                 double delta,
                                 double *out);

/**
 * Simulate rounds; the record is deterministic in (seed, round index).
 * `reversible` selects the reversible-controller routing (identical work
 * statistics).
 *
 * # Safety
 * Handles must be NULL or live; `out` must be NULL or writable.
 */
enum BwStatus bw_simulate(const struct BwGame *game,
                          const struct BwBehavior *behavior,
                          uint64_t rounds,
                          uint64_t seed,
                          bool reversible,
                          double delta,
                          struct BwWorkRecord **out);

/**
 * Release a work-record handle. NULL is a no-op.
 *
 * # Safety
 * `record` must be NULL or a handle returned by this library, not yet
 * freed.
 */
void bw_record_free(struct BwWorkRecord *record);

/**
 * Number of rounds in the record.
 *
 * # Safety
 * `record` must be NULL or a live handle; `out` must be NULL or writable.
 */
enum BwStatus bw_record_rounds(const struct BwWorkRecord *record, uint64_t *out);

/**
 * Number of charged rounds.
 *
 * # Safety
 * `record` must be NULL or a live handle; `out` must be NULL or writable.
 */
enum BwStatus bw_record_ones(const struct BwWorkRecord *record, uint64_t *out);

/**
 * Total banked energy, delta per charged round.
 *
 * # Safety
 * `record` must be NULL or a live handle; `out` must be NULL or writable.
 */
enum BwStatus bw_record_sum_work(const struct BwWorkRecord *record, double *out);

/**
 * Empirical success rate.
 *
 * # Safety
 * `record` must be NULL or a live handle; `out` must be NULL or writable.
 */
enum BwStatus bw_record_p_hat(const struct BwWorkRecord *record, double *out);

/**
 * The i-th work bit (0 or 1).
 *
 * # Safety
 * `record` must be NULL or a live handle; `out` must be NULL or writable.
 */
enum BwStatus bw_record_bit(const struct BwWorkRecord *record, uint64_t index, uint8_t *out);

/**
 * Serialize a record to NDJSON (free with `bw_string_free`).
 *
 * # Safety
 * `record` must be NULL or a live handle; `out` must be NULL or writable.
 */
enum BwStatus bw_record_to_ndjson(const struct BwWorkRecord *record, char **out);

/**
 * Parse a record from NDJSON.
 *
 * # Safety
 * `text` must be NULL or a valid NUL-terminated string; `out` must be
 * NULL or writable.
 */
enum BwStatus bw_record_from_ndjson(const char *text, struct BwWorkRecord **out);

/**
 * Certify a record against a game's thresholds and return the full
 * certificate as a JSON string (free with `bw_string_free`). Negative
 * `eta0_upper` / `eta1_upper` mean "no readout bound".
 *
 * # Safety
 * Handles must be NULL or live; `out` must be NULL or writable.
 */
enum BwStatus bw_certify_json(const struct BwWorkRecord *record,
                              const struct BwGame *game,
                              enum BwMethod method,
                              double alpha,
                              double eta0_upper,
                              double eta1_upper,
                              char **out);

/**
 * Binary entropy h2(p) in bits.
 *
 * # Safety
 * `out` must be NULL or writable.
 */
enum BwStatus bw_binary_entropy(double p, double *out);

/**
 * Hoeffding radius sqrt(ln(1/alpha) / (2n)).
 *
 * # Safety
 * `out` must be NULL or writable.
 */
enum BwStatus bw_hoeffding_epsilon(uint64_t n, double alpha, double *out);

/**
 * sin^2(pi/8), the largest symmetric work-bit flip rate that keeps an
 * ideal PR signal above the CHSH quantum ceiling.
 */
double bw_symmetric_flip_threshold(void);

/**
 * Clopper-Pearson interval endpoints.
 *
 * # Safety
 * `out_lower` and `out_upper` must be NULL or writable.
 */
enum BwStatus bw_clopper_pearson(uint64_t k,
                                 uint64_t n,
                                 double alpha,
                                 bool two_sided,
                                 double *out_lower,
                                 double *out_upper);

/**
 * Wilson interval endpoints.
 *
 * # Safety
 * `out_lower` and `out_upper` must be NULL or writable.
 */
enum BwStatus bw_wilson(uint64_t k, uint64_t n, double alpha, double *out_lower, double *out_upper);

/**
 * Release a string returned by this library. NULL is a no-op.
 *
 * # Safety
 * `s` must be NULL or a string returned by this library, not yet freed.
 */
void bw_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* BELLWORK_H */
