#ifndef COMMONS_H
#define COMMONS_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * ABI revision; bump on any breaking change to this surface.
 */
#define COMMONS_ABI_VERSION 1

/**
 * Status code of an FFI call.
 */
typedef enum CommonsStatus {
  CommonsStatus_Ok = 0,
  CommonsStatus_NullArgument = 1,
  CommonsStatus_InvalidUtf8 = 2,
  CommonsStatus_InvalidConfig = 3,
  CommonsStatus_DomainError = 4,
  CommonsStatus_SolverFailed = 5,
  CommonsStatus_BufferTooSmall = 6,
} CommonsStatus;

/**
 * Environment selector (pass as `int`).
 */
typedef enum CommonsEnv {
  CommonsEnv_Ho = 0,
  CommonsEnv_Ai = 1,
} CommonsEnv;

/**
 * Opaque parameter handle.
 */
typedef struct CommonsParams CommonsParams;

/**
 * Solved period equilibrium, flattened.
 */
typedef struct CommonsPeriod {
  double k;
  double alpha_star;
  double pool;
  double surplus;
  double sigma;
  double mu;
  double c_star;
  double q_l;
  double q_h;
  double q_total;
  double omega;
  double delta_bar;
  /**
   * Knowledge creation including any conversion term.
   */
  double h;
  uint8_t collapsed;
  uint8_t full_participation;
} CommonsPeriod;

/**
 * One steady state of the archive law of motion.
 */
typedef struct CommonsSteadyState {
  double k_star;
  double residual;
  /**
   * 1 when locally stable, 0 when an unstable basin boundary.
   */
  uint8_t stable;
} CommonsSteadyState;

/**
 * Critical conversion rate report.
 */
typedef struct CommonsEtaReport {
  double k_u;
  double eta_bar;
  double argmax_k;
  double limit_ratio;
  uint8_t feasible;
} CommonsEtaReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Last error message for this thread. Never null; empty before any failure.
 * The pointer stays valid until the thread's next FFI call.
 */
const char *commons_last_error_message(void);

/**
 * ABI revision of this library.
 */
uint32_t commons_abi_version(void);

/**
 * Create a handle holding the baseline calibration.
 */
struct CommonsParams *commons_params_new(void);

/**
 * Create a handle from a JSON document with blocks `shared`, `ho`, `ai`.
 * Missing fields keep their baseline values.
 *
 * # Safety
 * `json` must be a valid NUL-terminated string and `out` a valid pointer.
 */
enum CommonsStatus commons_params_from_json(const char *json, struct CommonsParams **out);

/**
 * Release a handle. Null is ignored.
 *
 * # Safety
 * `handle` must have come from this library and not be freed twice.
 */
void commons_params_free(struct CommonsParams *handle);

/**
 * Solve the period equilibrium at stock `k` and fill `out`, including the
 * creation level `h` at conversion rate `eta`.
 *
 * # Safety
 * `handle` and `out` must be valid pointers.
 */
enum CommonsStatus commons_solve_period(const struct CommonsParams *handle,
                                        double k,
                                        int env,
                                        double eta,
                                        struct CommonsPeriod *out);

/**
 * Expected new public knowledge h(k; eta).
 *
 * # Safety
 * `handle` and `out_h` must be valid pointers.
 */
enum CommonsStatus commons_creation(const struct CommonsParams *handle,
                                    double k,
                                    int env,
                                    double eta,
                                    double *out_h);

/**
 * Locate steady states of h(K; eta) = lambda K on the grid
 * [k_min, k_max] with `grid_n` points, refined to `refine_tol` in K.
 * Writes at most `capacity` entries to `out_buf` and the found count to
 * `out_len`; fails with `BufferTooSmall` when more states exist than fit.
 *
 * # Safety
 * `handle`, `out_buf` (with room for `capacity` entries), and `out_len`
 * must be valid pointers.
 */
enum CommonsStatus commons_steady_states(const struct CommonsParams *handle,
                                         int env,
                                         double eta,
                                         double k_min,
                                         double k_max,
                                         uintptr_t grid_n,
                                         double refine_tol,
                                         struct CommonsSteadyState *out_buf,
                                         uintptr_t capacity,
                                         uintptr_t *out_len);

/**
 * Iterate the law of motion from `k0` for at most `max_steps`, stopping
 * when successive stocks differ by less than `conv_tol`. Writes the path
 * (including `k0`) into `out_path` up to `capacity` entries.
 *
 * # Safety
 * `handle`, `out_path` (with room for `capacity` entries), `out_len`, and
 * `out_converged` must be valid pointers.
 */
enum CommonsStatus commons_simulate(const struct CommonsParams *handle,
                                    double k0,
                                    uintptr_t max_steps,
                                    int env,
                                    double eta,
                                    double conv_tol,
                                    double *out_path,
                                    uintptr_t capacity,
                                    uintptr_t *out_len,
                                    uint8_t *out_converged);

/**
 * Critical conversion rate for eliminating the low-archive basin.
 *
 * # Safety
 * `handle` and `out` must be valid pointers.
 */
enum CommonsStatus commons_critical_eta(const struct CommonsParams *handle,
                                        uintptr_t grid_n,
                                        struct CommonsEtaReport *out);

/**
 * Whether conversion at rate `eta` lifts average creation above
 * depreciation on the entire threshold region.
 *
 * # Safety
 * `handle` and `out` must be valid pointers.
 */
enum CommonsStatus commons_basin_eliminated(const struct CommonsParams *handle,
                                            double eta,
                                            uintptr_t grid_n,
                                            uint8_t *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* COMMONS_H */
