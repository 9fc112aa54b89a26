/* statecal — state-aware Bayesian calibration of computer models.
 *
 * C API for the shared library.  A job wraps one JSON run configuration;
 * every entry point returns an sc_status and never throws across the
 * boundary.  Handles are not thread-safe; use one job per thread.
 */
#ifndef STATECAL_H
#define STATECAL_H

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef struct sc_job sc_job;

typedef enum sc_status {
  SC_OK = 0,
  SC_ERR_INVALID_ARGUMENT = 1, /* bad handle / null pointer / bad flag value */
  SC_ERR_CONFIG = 2,           /* config file missing, malformed, or invalid */
  SC_ERR_IO = 3,               /* filesystem read/write failure */
  SC_ERR_SIMULATOR_REQUIRED = 4, /* run needs an external simulator command */
  SC_ERR_SIMULATOR_PROTOCOL = 5, /* simulator misbehaved (ERR, timeout, EOF) */
  SC_ERR_RUNTIME = 6           /* anything else (numerical failure, ...) */
} sc_status;

/* Library version, e.g. "0.1.0".  Static storage; do not free. */
const char* sc_version(void);

/* Open a job from a JSON run-configuration file.  On success *out_job owns
 * the parsed, validated configuration.  On failure *out_job is a stub that
 * only supports sc_job_last_error / sc_job_close (it is still non-NULL
 * unless allocation itself failed or out_job was NULL). */
sc_status sc_job_open(const char* config_path, sc_job** out_job);

/* Open a simulation-study job (no config file; scenarios are built in). */
sc_status sc_job_open_study(sc_job** out_job);

/* Overrides.  Applied on top of the configuration before the first run. */
sc_status sc_job_set_seed(sc_job* job, uint64_t seed);
sc_status sc_job_set_chains(sc_job* job, int n_chains);
sc_status sc_job_set_out_dir(sc_job* job, const char* out_dir);
sc_status sc_job_set_quiet(sc_job* job, int quiet);

/* Study jobs: run scenarios concurrently (each writes its own directory). */
sc_status sc_job_set_parallel_scenarios(sc_job* job, int parallel);

/* Run posterior sampling; writes traces + run metadata under out_dir. */
sc_status sc_job_calibrate(sc_job* job);

/* Predict at the configured grid from traces previously written by
 * sc_job_calibrate into out_dir; fails with SC_ERR_IO when they are
 * missing.  Writes predictions.csv plus the full draw matrices. */
sc_status sc_job_predict(sc_job* job);

/* Posterior-predictive checks from previously written traces; writes
 * diagnostics.csv and the replicate statistics. */
sc_status sc_job_diagnose(sc_job* job);

/* Run the built-in simulation study (study jobs only). */
sc_status sc_job_run_study(sc_job* job);

/* Message for the last failing call on this job ("" if none).  The pointer
 * stays valid until the next call on the same job or sc_job_close. */
const char* sc_job_last_error(const sc_job* job);

void sc_job_close(sc_job* job);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* STATECAL_H */
