// Command-line front end; talks to the core exclusively through the shared
// library's C API.
#include <charconv>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "statecal/statecal.h"

namespace {

const char* category_name(sc_status status) {
  switch (status) {
    case SC_OK: return "ok";
    case SC_ERR_INVALID_ARGUMENT: return "invalid_argument";
    case SC_ERR_CONFIG: return "config";
    case SC_ERR_IO: return "io";
    case SC_ERR_SIMULATOR_REQUIRED: return "simulator_required";
    case SC_ERR_SIMULATOR_PROTOCOL: return "simulator_protocol";
    case SC_ERR_RUNTIME: return "runtime";
  }
  return "runtime";
}

int report(sc_status status, const char* message) {
  if (status != SC_OK)
    std::fprintf(stderr, "error: %s: %s\n", category_name(status), message);
  return static_cast<int>(status);
}

int finish(sc_job* job, sc_status status) {
  const int code = report(status, sc_job_last_error(job));
  sc_job_close(job);
  return code;
}

// STATECAL_SEED beats the config seed; an explicit --seed beats both.
std::optional<std::uint64_t> env_seed(bool& bad) {
  bad = false;
  const char* text = std::getenv("STATECAL_SEED");
  if (!text || *text == '\0') return std::nullopt;
  std::uint64_t value = 0;
  const char* end = text + std::string_view(text).size();
  const auto [ptr, ec] = std::from_chars(text, end, value);
  if (ec != std::errc() || ptr != end) {
    bad = true;
    return std::nullopt;
  }
  return value;
}

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<int> chains;
  std::string out;
  bool quiet = false;
  bool parallel_scenarios = false;
};

sc_status apply_common(sc_job* job, const Options& opt) {
  bool bad_env = false;  // malformed values are rejected before open
  std::optional<std::uint64_t> seed = env_seed(bad_env);
  if (opt.seed) seed = opt.seed;
  sc_status s = SC_OK;
  if (seed && (s = sc_job_set_seed(job, *seed)) != SC_OK) return s;
  if (opt.chains && (s = sc_job_set_chains(job, *opt.chains)) != SC_OK)
    return s;
  if (!opt.out.empty() && (s = sc_job_set_out_dir(job, opt.out.c_str())) != SC_OK)
    return s;
  if ((s = sc_job_set_quiet(job, opt.quiet ? 1 : 0)) != SC_OK) return s;
  return SC_OK;
}

void add_common_flags(CLI::App* cmd, Options& opt, bool with_config) {
  if (with_config)
    cmd->add_option("--config", opt.config, "run configuration (JSON)")
        ->required();
  cmd->add_option("--seed", opt.seed,
                  "random seed (beats STATECAL_SEED and the config)");
  cmd->add_option("--chains", opt.chains, "number of MCMC chains");
  cmd->add_option("--out", opt.out, "output directory");
  cmd->add_flag("--quiet", opt.quiet, "suppress progress output");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"state-aware Bayesian calibration of computer models"};
  app.require_subcommand(1);

  Options opt;
  CLI::App* calibrate = app.add_subcommand(
      "calibrate", "sample the posterior and write chain traces");
  add_common_flags(calibrate, opt, true);
  CLI::App* predict = app.add_subcommand(
      "predict", "posterior predictions at the configured grid");
  add_common_flags(predict, opt, true);
  CLI::App* diagnose = app.add_subcommand(
      "diagnose", "posterior-predictive checks at the observed design");
  add_common_flags(diagnose, opt, true);
  CLI::App* simstudy = app.add_subcommand(
      "simstudy", "run the built-in synthetic calibration study");
  add_common_flags(simstudy, opt, false);
  simstudy->add_flag("--parallel-scenarios", opt.parallel_scenarios,
                     "run study scenarios concurrently");
  CLI::App* version =
      app.add_subcommand("version", "print the library version");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    return report(SC_ERR_INVALID_ARGUMENT, e.what());
  }

  if (version->parsed()) {
    std::printf("statecal %s\n", sc_version());
    return 0;
  }

  bool bad_env = false;
  env_seed(bad_env);
  if (bad_env && !opt.seed)
    return report(SC_ERR_CONFIG,
                  "STATECAL_SEED is not a non-negative integer");

  sc_job* job = nullptr;
  sc_status status = SC_OK;
  if (simstudy->parsed()) {
    status = sc_job_open_study(&job);
    if (status == SC_OK && opt.parallel_scenarios)
      status = sc_job_set_parallel_scenarios(job, 1);
  } else {
    status = sc_job_open(opt.config.c_str(), &job);
  }
  if (status != SC_OK) return finish(job, status);
  if ((status = apply_common(job, opt)) != SC_OK) return finish(job, status);

  if (calibrate->parsed())
    status = sc_job_calibrate(job);
  else if (predict->parsed())
    status = sc_job_predict(job);
  else if (diagnose->parsed())
    status = sc_job_diagnose(job);
  else
    status = sc_job_run_study(job);
  return finish(job, status);
}
