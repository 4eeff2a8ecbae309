/* C interface to the zenolab repeated-measurement quantum dynamics library. */

#ifndef ZENOLAB_H
#define ZENOLAB_H

/* Generated by cbindgen from the zenolab-ffi crate; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * How a protocol run ended.
 */
typedef enum ZenolabDisposition {
  ZENOLAB_DISPOSITION_COMPLETED = 0,
  ZENOLAB_DISPOSITION_STOPPED = 1,
  ZENOLAB_DISPOSITION_DISCARDED = 2,
} ZenolabDisposition;

/**
 * Status code of every fallible call; zero means success.
 */
typedef enum ZenolabStatus {
  ZENOLAB_STATUS_OK = 0,
  /**
   * A required pointer argument was null.
   */
  ZENOLAB_STATUS_NULL_ARGUMENT = 1,
  /**
   * Two states or operators live on different spaces.
   */
  ZENOLAB_STATUS_DIMENSION_MISMATCH = 2,
  /**
   * The Fock cutoff is too small for the requested amplitude.
   */
  ZENOLAB_STATUS_TRUNCATION = 3,
  /**
   * Attempted to normalize a vector of vanishing norm.
   */
  ZENOLAB_STATUS_ZERO_NORM = 4,
  /**
   * A partial trace addressed a missing tensor factor.
   */
  ZENOLAB_STATUS_INVALID_FACTOR = 5,
  /**
   * The pointer register cannot label every system state.
   */
  ZENOLAB_STATUS_APPARATUS_TOO_SMALL = 6,
  /**
   * The selected measurement branch has vanishing probability.
   */
  ZENOLAB_STATUS_DEGENERATE_BRANCH = 7,
  /**
   * A configuration violates one of its invariants.
   */
  ZENOLAB_STATUS_INVALID_CONFIG = 8,
  /**
   * An index was out of range.
   */
  ZENOLAB_STATUS_OUT_OF_RANGE = 9,
  /**
   * An internal panic was caught at the boundary.
   */
  ZENOLAB_STATUS_PANIC = 10,
} ZenolabStatus;

/**
 * Opaque protocol-report handle.
 */
typedef struct ZenolabReport ZenolabReport;

/**
 * Opaque state-vector handle.
 */
typedef struct ZenolabState ZenolabState;

/**
 * One per-step record of a protocol report.
 */
typedef struct ZenolabStep {
  uint32_t step;
  double phase_or_time;
  double target_re;
  double target_im;
  double probability_yes;
  double cumulative_prob;
  bool outcome_yes;
} ZenolabStep;

/**
 * Scalar summary of a protocol report. Optional fields carry a paired
 * `has_*` flag.
 */
typedef struct ZenolabReportSummary {
  double cumulative;
  double closed_form;
  bool has_single_shot;
  double single_shot;
  bool has_refined_closed_form;
  double refined_closed_form;
  double final_fidelity;
  double min_truncation_fidelity;
  enum ZenolabDisposition disposition;
} ZenolabReportSummary;

/**
 * Aggregate of a sampled Monte Carlo ensemble.
 */
typedef struct ZenolabEnsembleStats {
  uint32_t n_traj;
  uint32_t n_success;
  uint32_t n_failed;
  uint32_t n_discarded;
  double success_frequency;
  double mean_cumulative;
  double closed_form;
} ZenolabEnsembleStats;

/**
 * Result of the system-pointer entangling chain.
 */
typedef struct ZenolabChainSummary {
  double pointer_prob_0;
  double pointer_prob_1;
  double reduced_diag_0;
  double reduced_diag_1;
  double reduced_off_diagonal_max;
} ZenolabChainSummary;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copy the last error message (NUL-terminated) into `buffer` and return the
 * full length in bytes including the NUL; the message is truncated when
 * `capacity` is too small. A zero-capacity call just queries the length.
 */
size_t zenolab_last_error_message(char *buffer, size_t capacity);

/**
 * Static version string of the underlying library.
 */
const char *zenolab_version(void);

/**
 * Default Fock cutoff for amplitudes up to `alpha_max` in magnitude.
 */
size_t zenolab_default_dim(double alpha_max);

/**
 * Build the truncated coherent state |α⟩; writes the new handle and the
 * pre-renormalization norm² kept by the cutoff.
 */
enum ZenolabStatus zenolab_coherent_state(double alpha_re,
                                          double alpha_im,
                                          size_t dim,
                                          struct ZenolabState **out_state,
                                          double *out_truncation_fidelity);

/**
 * Release a state handle; null is a no-op.
 */
void zenolab_state_free(struct ZenolabState *state);

/**
 * Total dimension of a state.
 */
enum ZenolabStatus zenolab_state_dim(const struct ZenolabState *state, size_t *out_dim);

/**
 * Read one amplitude of a state.
 */
enum ZenolabStatus zenolab_state_amplitude(const struct ZenolabState *state,
                                           size_t index,
                                           double *out_re,
                                           double *out_im);

/**
 * Inner product ⟨a|b⟩ with the first argument conjugated.
 */
enum ZenolabStatus zenolab_inner_product(const struct ZenolabState *a,
                                         const struct ZenolabState *b,
                                         double *out_re,
                                         double *out_im);

/**
 * Born probability |⟨target|s⟩|².
 */
enum ZenolabStatus zenolab_born_probability(const struct ZenolabState *s,
                                            const struct ZenolabState *target,
                                            double *out_probability);

/**
 * Closed-form coherent overlap ⟨α|β⟩ = exp(-|α|²/2 - |β|²/2 + ᾱβ).
 */
enum ZenolabStatus zenolab_coherent_overlap(double alpha_re,
                                            double alpha_im,
                                            double beta_re,
                                            double beta_im,
                                            double *out_re,
                                            double *out_im);

/**
 * Exact all-yes probability e^{-N|Δ|²} of an N-step drag.
 */
enum ZenolabStatus zenolab_drag_closed_form(double delta_re,
                                            double delta_im,
                                            uint32_t steps,
                                            double *out_probability);

/**
 * Exact all-yes probability of sweeping through `thetas` (strictly
 * increasing, `len` entries).
 */
enum ZenolabStatus zenolab_laskey_closed_form(double gamma_re,
                                              double gamma_im,
                                              const double *thetas,
                                              size_t len,
                                              double *out_probability);

/**
 * Survival probability (cos²(ΩT/2N))^N of N projections during a drive.
 */
enum ZenolabStatus zenolab_zeno_closed_form(double rabi_frequency,
                                            double total_time,
                                            uint32_t measurements,
                                            double *out_probability);

/**
 * Run the forced-yes amplitude drag; `dim` 0 selects the default cutoff.
 */
enum ZenolabStatus zenolab_drag_run(double alpha0_re,
                                    double alpha0_im,
                                    double delta_re,
                                    double delta_im,
                                    uint32_t steps,
                                    size_t dim,
                                    struct ZenolabReport **out_report);

/**
 * Run the forced-yes swept-basis protocol; `dim` 0 selects the default
 * cutoff.
 */
enum ZenolabStatus zenolab_laskey_run(double alpha0_re,
                                      double alpha0_im,
                                      double gamma_re,
                                      double gamma_im,
                                      double theta_start,
                                      double theta_end,
                                      uint32_t substeps,
                                      bool observe,
                                      size_t dim,
                                      struct ZenolabReport **out_report);

/**
 * Run the forced-yes decay freeze.
 */
enum ZenolabStatus zenolab_zeno_run(double rabi_frequency,
                                    double total_time,
                                    uint32_t measurements,
                                    struct ZenolabReport **out_report);

/**
 * Release a report handle; null is a no-op.
 */
void zenolab_report_free(struct ZenolabReport *report);

/**
 * Number of recorded steps in a report.
 */
enum ZenolabStatus zenolab_report_len(const struct ZenolabReport *report, size_t *out_len);

/**
 * Copy one step record out of a report.
 */
enum ZenolabStatus zenolab_report_step(const struct ZenolabReport *report,
                                       size_t index,
                                       struct ZenolabStep *out_step);

/**
 * Copy the scalar summary out of a report.
 */
enum ZenolabStatus zenolab_report_summary(const struct ZenolabReport *report,
                                          struct ZenolabReportSummary *out_summary);

/**
 * Sampled drag ensemble; trajectory i draws from stream (master_seed, i).
 */
enum ZenolabStatus zenolab_drag_ensemble(double alpha0_re,
                                         double alpha0_im,
                                         double delta_re,
                                         double delta_im,
                                         uint32_t steps,
                                         size_t dim,
                                         bool record_and_stop,
                                         uint32_t n_traj,
                                         uint64_t master_seed,
                                         struct ZenolabEnsembleStats *out_stats);

/**
 * Sampled swept-basis ensemble (always observing).
 */
enum ZenolabStatus zenolab_laskey_ensemble(double alpha0_re,
                                           double alpha0_im,
                                           double gamma_re,
                                           double gamma_im,
                                           double theta_start,
                                           double theta_end,
                                           uint32_t substeps,
                                           size_t dim,
                                           bool record_and_stop,
                                           uint32_t n_traj,
                                           uint64_t master_seed,
                                           struct ZenolabEnsembleStats *out_stats);

/**
 * Sampled decay-freeze ensemble.
 */
enum ZenolabStatus zenolab_zeno_ensemble(double rabi_frequency,
                                         double total_time,
                                         uint32_t measurements,
                                         uint32_t n_traj,
                                         uint64_t master_seed,
                                         struct ZenolabEnsembleStats *out_stats);

/**
 * Entangle (c₁|0⟩ + c₂|1⟩) with a two-state pointer and report the
 * reductions.
 */
enum ZenolabStatus zenolab_chain_run(double c1_re,
                                     double c1_im,
                                     double c2_re,
                                     double c2_im,
                                     struct ZenolabChainSummary *out_summary);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ZENOLAB_H */
