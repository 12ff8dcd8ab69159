#ifndef REGEN_EXTREMES_H
#define REGEN_EXTREMES_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum RegenStatus {
  REGEN_STATUS_OK = 0,
  REGEN_STATUS_NULL_POINTER = 1,
  REGEN_STATUS_INVALID_ARGUMENT = 2,
  REGEN_STATUS_DOMAIN = 3,
  REGEN_STATUS_NO_ROOT = 4,
  REGEN_STATUS_CONVERGENCE = 5,
  REGEN_STATUS_OVERFLOW = 6,
  REGEN_STATUS_BUDGET = 7,
  REGEN_STATUS_BRACKET = 8,
  REGEN_STATUS_MODEL = 9,
  REGEN_STATUS_CYCLE_OVERFLOW = 10,
  REGEN_STATUS_PANIC = 11,
} RegenStatus;

/**
 * Opaque birth–death model with rates `λn + a` up and `μn` down.
 */
typedef struct RegenBirthDeath RegenBirthDeath;

/**
 * Opaque log-tail envelope `R₀`.
 */
typedef struct RegenEnvelope RegenEnvelope;

/**
 * Opaque regenerative model for [`regen_run_cycles`].
 */
typedef struct RegenModel RegenModel;

/**
 * Opaque checkpointed trajectory.
 */
typedef struct RegenPath RegenPath;

/**
 * Nondecreasing function supplied from C.
 */
typedef double (*RegenRealFn)(double x, void *user_data);

/**
 * Running-maximum state at one checkpoint.
 */
typedef struct RegenCheckpoint {
  double t;
  double xbar;
  uint64_t n_cycles;
  double z_lower;
  double z_upper;
} RegenCheckpoint;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or NULL. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *regen_last_error_message(void);

/**
 * Positive root of `e^x = 1 + x/rho`, `0 < rho < 1`.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum RegenStatus regen_x_rho_root(double rho, double *out);

/**
 * Cramér exponent of the M/M/1 waiting time.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum RegenStatus regen_cramer_gamma_mm1(double lambda, double mu, double *out);

/**
 * Cramér exponent of the M/D/1 waiting time with service time `d`.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum RegenStatus regen_cramer_gamma_md1(double lambda, double d, double *out);

/**
 * Cramér exponent of a GI/G/1 queue given distribution strings such as
 * `"exp:0.5"`, `"det:1"`, `"uniform:1:3"`, `"erlang:2:1"`, `"weibull:2:1"`.
 *
 * # Safety
 * `arrival` and `service` must be NUL-terminated; `out` valid for writes.
 */
enum RegenStatus regen_cramer_gamma_gig1(const char *arrival, const char *service, double *out);

/**
 * `Σ_{k=1}^n p^k/k^b` and its asymptotic form `p^{n+1}/((p−1) n^b)`.
 *
 * # Safety
 * `exact` and `asymptotic` must be valid for writes.
 */
enum RegenStatus regen_lemma5_sum(double p,
                                  double b,
                                  uint64_t n,
                                  double *exact,
                                  double *asymptotic);

/**
 * `inf{x in [lo, hi] : h(x) > y}` for a nondecreasing callback `h`.
 *
 * # Safety
 * `h` must be safe to call with `user_data`; `out` valid for writes.
 */
enum RegenStatus regen_generalized_inverse(RegenRealFn h,
                                           void *user_data,
                                           double y,
                                           double lo,
                                           double hi,
                                           double *out);

/**
 * `R₀(x) = γx`.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum RegenStatus regen_envelope_linear(double gamma, struct RegenEnvelope **out);

/**
 * `R₀(x) = x^β`.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum RegenStatus regen_envelope_power(double beta, struct RegenEnvelope **out);

/**
 * Birth–death envelope `R₀(x) = −x log ρ − (a/λ) log x`.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum RegenStatus regen_envelope_birth_death(double lambda,
                                            double mu,
                                            double a,
                                            struct RegenEnvelope **out);

/**
 * # Safety
 * `env` must be NULL or a handle from a `regen_envelope_*` constructor, not yet freed.
 */
void regen_envelope_free(struct RegenEnvelope *env);

/**
 * # Safety
 * `env` must be a live handle; `out` valid for writes.
 */
enum RegenStatus regen_envelope_rate(const struct RegenEnvelope *env, double x, double *out);

/**
 * `R₀⁻¹(y)`.
 *
 * # Safety
 * `env` must be a live handle; `out` valid for writes.
 */
enum RegenStatus regen_envelope_inverse(const struct RegenEnvelope *env, double y, double *out);

/**
 * Measured bound on `|R₁|` (0 when the envelope carries none).
 *
 * # Safety
 * `env` must be a live handle; `out` valid for writes.
 */
enum RegenStatus regen_envelope_r1_bound(const struct RegenEnvelope *env, double *out);

/**
 * Centering `A₀(t) = R₀⁻¹(log(t/α_T))`.
 *
 * # Safety
 * `env` must be a live handle; `out` valid for writes.
 */
enum RegenStatus regen_envelope_a0(const struct RegenEnvelope *env,
                                   double alpha_t,
                                   double t,
                                   double *out);

/**
 * The `log log` and `log log log` normalised deviations of `xbar` at `t`.
 *
 * # Safety
 * `env` must be a live handle; `s2` and `s3` valid for writes.
 */
enum RegenStatus regen_normalized_stats(const struct RegenEnvelope *env,
                                        double alpha_t,
                                        double t,
                                        double xbar,
                                        double *s2,
                                        double *s3);

/**
 * # Safety
 * `out` must be valid for writes.
 */
enum RegenStatus regen_bd_new(double lambda, double mu, double a, struct RegenBirthDeath **out);

/**
 * # Safety
 * `bd` must be NULL or a handle from [`regen_bd_new`], not yet freed.
 */
void regen_bd_free(struct RegenBirthDeath *bd);

/**
 * `P(cycle maximum > n)`.
 *
 * # Safety
 * `bd` must be a live handle; `out` valid for writes.
 */
enum RegenStatus regen_bd_q_exact(const struct RegenBirthDeath *bd, uint64_t n, double *out);

/**
 * `log P(cycle maximum > n)`, usable where the probability underflows.
 *
 * # Safety
 * `bd` must be a live handle; `out` valid for writes.
 */
enum RegenStatus regen_bd_log_q_exact(const struct RegenBirthDeath *bd, uint64_t n, double *out);

/**
 * `((1/ρ − 1)/C) ρ^{n+1} n^{a/λ}`, `n ≥ 1`. The first call computes `C`.
 *
 * # Safety
 * `bd` must be a live handle not used concurrently; `out` valid for writes.
 */
enum RegenStatus regen_bd_q_asymptotic(struct RegenBirthDeath *bd, uint64_t n, double *out);

/**
 * `C = lim n^{a/λ} β_n` and its extrapolation error.
 *
 * # Safety
 * `bd` must be a live handle; `value` and `error` valid for writes.
 */
enum RegenStatus regen_bd_c_constant(const struct RegenBirthDeath *bd,
                                     double *value,
                                     double *error);

/**
 * Stationary probability of state 0.
 *
 * # Safety
 * `bd` must be a live handle; `out` valid for writes.
 */
enum RegenStatus regen_bd_p0(const struct RegenBirthDeath *bd, double *out);

/**
 * Mean cycle length `1/(a p₀)`.
 *
 * # Safety
 * `bd` must be a live handle; `out` valid for writes.
 */
enum RegenStatus regen_bd_alpha_t(const struct RegenBirthDeath *bd, double *out);

/**
 * Simulates `replicas` hitting times of level `n` from state 0 and writes
 * the scaled times into `scaled` (length `replicas`), the KS distance to
 * `Exp(a p₀)` and the sample mean. `event_budget <= 0` selects the default.
 *
 * # Safety
 * `bd` must be a live handle; `scaled` valid for `replicas` writes;
 * `ks_distance` and `mean_scaled` valid for writes.
 */
enum RegenStatus regen_bd_hitting_times(const struct RegenBirthDeath *bd,
                                        uint64_t n,
                                        uint64_t replicas,
                                        uint64_t seed,
                                        double event_budget,
                                        double *scaled,
                                        double *ks_distance,
                                        double *mean_scaled);

/**
 * # Safety
 * `out` must be valid for writes.
 */
enum RegenStatus regen_model_mm1(double lambda, double mu, struct RegenModel **out);

/**
 * # Safety
 * `out` must be valid for writes.
 */
enum RegenStatus regen_model_md1(double lambda, double d, struct RegenModel **out);

/**
 * GI/G/1 from distribution strings (see [`regen_cramer_gamma_gig1`]).
 *
 * # Safety
 * `arrival` and `service` must be NUL-terminated; `out` valid for writes.
 */
enum RegenStatus regen_model_gig1(const char *arrival,
                                  const char *service,
                                  struct RegenModel **out);

/**
 * # Safety
 * `out` must be valid for writes.
 */
enum RegenStatus regen_model_mmm(double lambda,
                                 double mu,
                                 uint32_t servers,
                                 struct RegenModel **out);

/**
 * # Safety
 * `out` must be valid for writes.
 */
enum RegenStatus regen_model_birth_death(double lambda,
                                         double mu,
                                         double a,
                                         struct RegenModel **out);

/**
 * # Safety
 * `model` must be NULL or a handle from a `regen_model_*` constructor, not yet freed.
 */
void regen_model_free(struct RegenModel *model);

/**
 * Mean cycle length: closed form where known, else a burn-in estimate
 * drawn from an auxiliary stream of `seed`.
 *
 * # Safety
 * `model` must be a live handle; `out` valid for writes.
 */
enum RegenStatus regen_model_alpha_t(const struct RegenModel *model, uint64_t seed, double *out);

/**
 * Simulates cycles of `model` up to `t_max` on the grid `t_min · ratio^j`,
 * using stream `replica` of `seed`.
 *
 * # Safety
 * `model` must be a live handle; `out` valid for writes.
 */
enum RegenStatus regen_run_cycles(const struct RegenModel *model,
                                  double t_max,
                                  double t_min,
                                  double ratio,
                                  uint64_t seed,
                                  uint64_t replica,
                                  struct RegenPath **out);

/**
 * Number of checkpoints; 0 for NULL.
 *
 * # Safety
 * `path` must be NULL or a live handle.
 */
size_t regen_path_len(const struct RegenPath *path);

/**
 * # Safety
 * `path` must be a live handle; `out` valid for writes.
 */
enum RegenStatus regen_path_get(const struct RegenPath *path,
                                size_t index,
                                struct RegenCheckpoint *out);

/**
 * # Safety
 * `path` must be NULL or a handle from [`regen_run_cycles`], not yet freed.
 */
void regen_path_free(struct RegenPath *path);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* REGEN_EXTREMES_H */
