#include "statecal/statecal.h"

#include <new>
#include <optional>
#include <string>

#include "config.hpp"
#include "engine.hpp"
#include "error.hpp"
#include "experiments.hpp"

struct sc_job {
  bool is_study = false;
  bool valid = false;  // false: only last_error/close are meaningful
  std::optional<statecal::config::RunConfig> cfg;
  statecal::experiments::StudyConfig study;
  statecal::engine::Overrides overrides;
  bool quiet = false;
  std::string last_error;
};

namespace {

sc_status status_from(statecal::ErrorCode code) {
  using statecal::ErrorCode;
  switch (code) {
    case ErrorCode::invalid_argument: return SC_ERR_INVALID_ARGUMENT;
    case ErrorCode::config: return SC_ERR_CONFIG;
    case ErrorCode::io: return SC_ERR_IO;
    case ErrorCode::simulator_required: return SC_ERR_SIMULATOR_REQUIRED;
    case ErrorCode::simulator_protocol: return SC_ERR_SIMULATOR_PROTOCOL;
    case ErrorCode::runtime: return SC_ERR_RUNTIME;
  }
  return SC_ERR_RUNTIME;
}

template <typename F>
sc_status guarded(sc_job* job, F&& body) {
  if (!job) return SC_ERR_INVALID_ARGUMENT;
  job->last_error.clear();
  try {
    body();
    return SC_OK;
  } catch (const statecal::Error& e) {
    job->last_error = e.what();
    return status_from(e.code());
  } catch (const std::exception& e) {
    job->last_error = e.what();
    return SC_ERR_RUNTIME;
  } catch (...) {
    job->last_error = "unknown failure";
    return SC_ERR_RUNTIME;
  }
}

void require_run_job(const sc_job& job) {
  statecal::require(job.valid && !job.is_study,
                    statecal::ErrorCode::invalid_argument,
                    job.is_study
                        ? "study jobs only support sc_job_run_study"
                        : "job holds no usable configuration (open failed)");
}

statecal::config::RunConfig resolved(const sc_job& job) {
  return statecal::engine::apply_overrides(*job.cfg, job.overrides);
}

}  // namespace

extern "C" {

const char* sc_version(void) { return statecal::engine::kVersion; }

sc_status sc_job_open(const char* config_path, sc_job** out_job) {
  if (!out_job) return SC_ERR_INVALID_ARGUMENT;
  sc_job* job = new (std::nothrow) sc_job;
  *out_job = job;
  if (!job) return SC_ERR_RUNTIME;
  if (!config_path) {
    job->last_error = "config_path is NULL";
    return SC_ERR_INVALID_ARGUMENT;
  }
  return guarded(job, [&] {
    job->cfg = statecal::config::parse_config(config_path);
    job->valid = true;
  });
}

sc_status sc_job_open_study(sc_job** out_job) {
  if (!out_job) return SC_ERR_INVALID_ARGUMENT;
  sc_job* job = new (std::nothrow) sc_job;
  *out_job = job;
  if (!job) return SC_ERR_RUNTIME;
  job->is_study = true;
  job->valid = true;
  job->study.out_dir = "study_out";
  return SC_OK;
}

sc_status sc_job_set_seed(sc_job* job, uint64_t seed) {
  return guarded(job, [&] {
    job->overrides.seed = seed;
    job->study.seed = seed;
  });
}

sc_status sc_job_set_chains(sc_job* job, int n_chains) {
  return guarded(job, [&] {
    statecal::require(n_chains >= 1, statecal::ErrorCode::invalid_argument,
                      "n_chains must be at least 1");
    job->overrides.n_chains = n_chains;
    job->study.chain.n_chains = n_chains;
  });
}

sc_status sc_job_set_out_dir(sc_job* job, const char* out_dir) {
  return guarded(job, [&] {
    statecal::require(out_dir != nullptr,
                      statecal::ErrorCode::invalid_argument,
                      "out_dir is NULL");
    job->overrides.out_dir = out_dir;
    job->study.out_dir = out_dir;
  });
}

sc_status sc_job_set_quiet(sc_job* job, int quiet) {
  return guarded(job, [&] {
    job->quiet = quiet != 0;
    job->study.quiet = quiet != 0;
  });
}

sc_status sc_job_set_parallel_scenarios(sc_job* job, int parallel) {
  return guarded(job, [&] { job->study.parallel_scenarios = parallel != 0; });
}

sc_status sc_job_calibrate(sc_job* job) {
  return guarded(job, [&] {
    require_run_job(*job);
    statecal::engine::calibrate(resolved(*job), job->quiet);
  });
}

sc_status sc_job_predict(sc_job* job) {
  return guarded(job, [&] {
    require_run_job(*job);
    statecal::engine::predict(resolved(*job), job->quiet);
  });
}

sc_status sc_job_diagnose(sc_job* job) {
  return guarded(job, [&] {
    require_run_job(*job);
    statecal::engine::diagnose(resolved(*job), job->quiet);
  });
}

sc_status sc_job_run_study(sc_job* job) {
  return guarded(job, [&] {
    statecal::require(job->valid && job->is_study,
                      statecal::ErrorCode::invalid_argument,
                      "not a study job; open with sc_job_open_study");
    const auto report = statecal::engine::run_study(job->study);
    statecal::require(report.all_ok(), statecal::ErrorCode::runtime,
                      "one or more study scenarios failed; see "
                      "study_summary.csv");
  });
}

const char* sc_job_last_error(const sc_job* job) {
  return job ? job->last_error.c_str() : "";
}

void sc_job_close(sc_job* job) { delete job; }

}  // extern "C"
