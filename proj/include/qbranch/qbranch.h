/*
 * C interface to the qbranch library: branch decompositions, real-state
 * trajectories, Born-rule sampling, and horizon-sweep diagnostics for closed
 * bipartite quantum systems.
 *
 * All objects are opaque handles created and destroyed by the library. Every
 * fallible call returns a qb_status; on failure qb_last_error() gives a
 * human-readable message for the calling thread.
 */
#ifndef QBRANCH_QBRANCH_H
#define QBRANCH_QBRANCH_H

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum qb_status {
  QB_OK = 0,
  QB_ERR_INVALID_ARGUMENT = 1,
  QB_ERR_CONFIG = 2,
  QB_ERR_NUMERIC = 3,
  QB_ERR_IO = 4
} qb_status;

typedef struct qb_model qb_model;
typedef struct qb_branch_set qb_branch_set;
typedef struct qb_report qb_report;

const char* qb_version(void);

/* Message for the most recent failure on the calling thread; valid until the
 * next failing call on the same thread. */
const char* qb_last_error(void);

/* ---- model builders ---------------------------------------------------- */

/* System qubit copied onto n_env environment qubits, one controlled flip of
 * duration pi/(2*coupling) around each recording time; one time per qubit. */
qb_status qb_model_measurement_chain(double alpha_re, double alpha_im, double beta_re,
                                     double beta_im, int n_env, double coupling,
                                     const double* recording_times, int n_times,
                                     qb_model** out);

/* One-qubit chain whose record is unwritten again around t_unrecord. */
qb_status qb_model_recoherence(double alpha_re, double alpha_im, double beta_re,
                               double beta_im, double t_record, double t_unrecord,
                               double coupling, qb_model** out);

/* Seeded random Hermitian Hamiltonian and random initial state. */
qb_status qb_model_random(uint64_t seed, int dim_a, int dim_b, double energy_scale,
                          qb_model** out);

void qb_model_free(qb_model* model);
int qb_model_dim_a(const qb_model* model);
int qb_model_dim_b(const qb_model* model);

/* ---- branches ----------------------------------------------------------- */

/* Final-time branch extraction. decomposition_kind is "basis", "fourier" or
 * "schmidt"; degeneracy_tol is used by the schmidt kind. The returned handle
 * retains everything needed to evaluate per-branch quantities. */
qb_status qb_final_branches(const qb_model* model, const char* decomposition_kind,
                            double degeneracy_tol, double horizon, qb_branch_set** out);
void qb_branch_set_free(qb_branch_set* set);

int qb_branch_count(const qb_branch_set* set);
const char* qb_branch_label(const qb_branch_set* set, int index);
double qb_branch_probability(const qb_branch_set* set, int index);
double qb_branch_dropped_mass(const qb_branch_set* set);

/* Real state of branch `index` at time t. Fills two dim_a*dim_a arrays
 * (row-major real and imaginary parts). */
qb_status qb_real_state(const qb_branch_set* set, int index, double t, double* re,
                        double* im);

/* Normalized two-time weights of branch `index` over the components at time
 * t. Writes at most capacity entries; *count receives the component count. */
qb_status qb_two_time_weights(const qb_branch_set* set, int index, double t,
                              double* weights, int capacity, int* count);

/* Born-rule draw; *index_out receives the realized branch index. Identical
 * (seed, branch order) pairs give identical draws. */
qb_status qb_sample_branch(const qb_branch_set* set, uint64_t seed, int* index_out);

/* ---- horizon sweeps ------------------------------------------------------ */

qb_status qb_horizon_sweep(const qb_model* model, const char* decomposition_kind,
                           double degeneracy_tol, const double* horizons, int n_horizons,
                           const double* sample_times, int n_times, double eps_p,
                           double eps_rho, int n_stable, qb_report** out);
void qb_report_free(qb_report* report);

int qb_report_converged(const qb_report* report);
int qb_report_branch_count_stable(const qb_report* report);
int qb_report_series_count(const qb_report* report);
const char* qb_report_series_label(const qb_report* report, int series);
double qb_report_series_estimate(const qb_report* report, int series);

/* Full report as a JSON document; free with qb_string_free. */
qb_status qb_report_to_json(const qb_report* report, char** json_out);
void qb_string_free(char* text);

/* ---- batch pipeline ------------------------------------------------------ */

/* Validates a UTF-8 JSON run configuration without computing anything. */
qb_status qb_validate_config(const char* config_json);

/* Parses, validates and executes a run configuration, writing the output
 * files. output_dir and seed, when non-null, override the config. When
 * summary_json_out is non-null it receives a JSON summary of the run (free
 * with qb_string_free). */
qb_status qb_run_config(const char* config_json, const char* output_dir,
                        const uint64_t* seed, char** summary_json_out);

#ifdef __cplusplus
}
#endif

#endif /* QBRANCH_QBRANCH_H */
