#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <vector>

#include "config.hpp"
#include "dataset.hpp"
#include "experiments.hpp"
#include "modelspec.hpp"
#include "sampler.hpp"
#include "simulator.hpp"

namespace statecal::engine {

inline constexpr const char* kVersion = "0.1.0";

// Command-line/environment overrides applied on top of a parsed config.
struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<int> n_chains;
  std::optional<std::filesystem::path> out_dir;
};

config::RunConfig apply_overrides(config::RunConfig cfg, const Overrides& ov);

// Resolved run: dataset in the internal frame, validated model, and
// simulator sessions matching the concurrency plan (one shared serialized
// session, or one session per chain when the simulator is safe for
// concurrent requests).
struct Run {
  FieldDataset data;
  ModelSpec spec;
  std::shared_ptr<Simulator> shared;
  std::vector<std::unique_ptr<Simulator>> per_chain;

  Simulator& for_chain(int k);
  Simulator& single() { return for_chain(0); }
};

Run prepare(const config::RunConfig& cfg);

// Posterior sampling; writes per-chain traces, acceptance summaries, the
// R-hat table, and run metadata under cfg.out_dir.
void calibrate(const config::RunConfig& cfg, bool quiet = false);

// Loads traces written by calibrate and predicts at the configured grid;
// writes predictions.csv plus the full draw matrices.
void predict(const config::RunConfig& cfg, bool quiet = false);

// Loads traces and runs posterior-predictive checks at the observed design;
// writes diagnostics.csv and the replicate statistics.
void diagnose(const config::RunConfig& cfg, bool quiet = false);

experiments::StudyReport run_study(const experiments::StudyConfig& cfg);

// Re-assembles the TraceSet written by calibrate (errors with a "run
// calibrate first" hint when the files are missing).
sampler::TraceSet load_traces(const std::filesystem::path& out_dir);

}  // namespace statecal::engine
