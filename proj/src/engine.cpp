#include "engine.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include <json.hpp>

#include "diagnostics.hpp"
#include "error.hpp"
#include "external_sim.hpp"
#include "io.hpp"
#include "predict.hpp"

namespace statecal::engine {

using nlohmann::json;

namespace {

constexpr std::uint64_t kPredictStream = 1000003;
constexpr std::uint64_t kDiagnoseStream = 2000003;

std::vector<std::string> split_command(const std::string& line) {
  std::vector<std::string> parts;
  std::istringstream in(line);
  std::string part;
  while (in >> part) parts.push_back(part);
  return parts;
}

void write_trace_files(const sampler::TraceSet& trace,
                       const std::filesystem::path& dir) {
  for (const auto& chain : trace.chains)
    io::write_csv(
        dir / ("trace_chain" + std::to_string(chain.chain_index) + ".csv"),
        io::Table{chain.columns, chain.draws});

  io::Table rhat;
  rhat.values.resize(1, static_cast<int>(trace.rhat.size()));
  int j = 0;
  for (const auto& [name, value] : trace.rhat) {
    rhat.columns.push_back(name);
    rhat.values(0, j++) = value;
  }
  if (!trace.rhat.empty()) io::write_csv(dir / "rhat.csv", rhat);

  std::ostringstream out;
  out << "chain,block,target,scale,accept_final_window,accept_burn_tail,"
         "accept_post\n";
  for (const auto& chain : trace.chains)
    for (const auto& b : chain.blocks)
      out << chain.chain_index << ',' << b.name << ','
          << (b.scalar_target ? "scalar" : "block") << ','
          << io::format_double(b.scale) << ','
          << io::format_double(b.accept_final_window) << ','
          << io::format_double(b.accept_burn_tail) << ','
          << io::format_double(b.accept_post) << '\n';
  io::write_text(dir / "acceptance.csv", out.str());
}

}  // namespace

config::RunConfig apply_overrides(config::RunConfig cfg, const Overrides& ov) {
  if (ov.seed) {
    cfg.seed = *ov.seed;
    cfg.chains.seed = *ov.seed;
  }
  if (ov.n_chains) {
    cfg.chains.n_chains = *ov.n_chains;
    cfg.chains.validate();
  }
  if (ov.out_dir) cfg.out_dir = *ov.out_dir;
  return cfg;
}

Simulator& Run::for_chain(int k) {
  if (!per_chain.empty())
    return *per_chain[static_cast<size_t>(k) % per_chain.size()];
  return *shared;
}

Run prepare(const config::RunConfig& cfg) {
  Run run;

  const io::Table table = io::read_csv(cfg.data_file);
  require(table.values.cols() >= 2, ErrorCode::config,
          "data file needs at least one control column and the response");
  RawDataset raw;
  const int d = static_cast<int>(table.values.cols()) - 1;
  raw.x = table.values.leftCols(d);
  raw.y = table.values.col(d);
  run.data = standardize(raw, cfg.x_bounds.value_or(std::vector<Bounds>{}));

  ModelSpec spec;
  spec.variant = cfg.variant;
  spec.link = cfg.link;
  spec.mu_theta = cfg.mu_theta;
  spec.hyper = cfg.hyper;
  for (const auto& p : cfg.parameters) {
    ParameterSpec ps;
    ps.name = p.name;
    ps.role = p.role;
    ps.lower = p.lower;
    ps.upper = p.upper;
    for (const auto& c : p.constraints) {
      require(c.x_raw.size() == run.data.dim_x(), ErrorCode::config,
              "constraint site dimension does not match the control inputs");
      PathConstraint pc;
      pc.x_scaled =
          run.data.scale_inputs(c.x_raw.transpose()).row(0).transpose();
      pc.lower = c.lower;
      pc.upper = c.upper;
      ps.constraints.push_back(std::move(pc));
    }
    spec.parameters.push_back(std::move(ps));
  }
  spec.validate();
  run.spec = std::move(spec);

  const auto& sim = cfg.simulator;
  switch (sim.kind) {
    case config::SimulatorChoice::Kind::builtin: {
      run.shared = make_builtin_simulator(sim.builtin_name);
      break;
    }
    case config::SimulatorChoice::Kind::external_command: {
      std::vector<std::string> argv = sim.command;
      if (argv.size() == 1) argv = split_command(argv[0]);
      require(!argv.empty(), ErrorCode::config,
              "external simulator command is empty");
      if (sim.concurrent_safe) {
        for (int k = 0; k < cfg.chains.n_chains; ++k)
          run.per_chain.push_back(std::make_unique<ExternalSimulator>(
              argv, run.data.dim_x(), run.spec.n_params(), sim.timeout_s,
              true));
      } else {
        run.shared = std::make_shared<SerializedSimulator>(
            std::make_shared<ExternalSimulator>(argv, run.data.dim_x(),
                                                run.spec.n_params(),
                                                sim.timeout_s, false));
      }
      break;
    }
    case config::SimulatorChoice::Kind::external_unattached:
      fail(ErrorCode::simulator_required,
           "simulator required: the configuration declares an external "
           "simulator but no command is attached");
  }

  Simulator& s = run.single();
  require(s.dim_x() == run.data.dim_x(), ErrorCode::config,
          "simulator expects " + std::to_string(s.dim_x()) +
              " control input(s), data has " +
              std::to_string(run.data.dim_x()));
  require(s.n_params() == run.spec.n_params(), ErrorCode::config,
          "simulator expects " + std::to_string(s.n_params()) +
              " calibration parameter(s), model declares " +
              std::to_string(run.spec.n_params()));
  return run;
}

void calibrate(const config::RunConfig& cfg, bool quiet) {
  Run run = prepare(cfg);
  io::ensure_dir(cfg.out_dir);

  sampler::TraceSet trace = sampler::run_chains(
      run.spec, run.data,
      [&run](int k) -> Simulator& { return run.for_chain(k); }, cfg.chains,
      /*parallel=*/true);

  write_trace_files(trace, cfg.out_dir);

  json meta;
  meta["version"] = kVersion;
  meta["seed"] = cfg.seed;
  meta["variant"] = variant_name(cfg.variant);
  meta["link"] = linkfun::name(cfg.link);
  meta["n_chains"] = cfg.chains.n_chains;
  meta["n_recorded"] = cfg.chains.n_recorded();
  meta["n_design"] = run.data.n();
  meta["columns"] = trace.columns;
  {
    json rhat = json::object();
    for (const auto& [name, value] : trace.rhat) rhat[name] = value;
    meta["rhat"] = std::move(rhat);
    json blocks = json::array();
    for (const auto& chain : trace.chains)
      for (const auto& b : chain.blocks)
        blocks.push_back({{"chain", chain.chain_index},
                          {"block", b.name},
                          {"target", b.scalar_target ? "scalar" : "block"},
                          {"scale", b.scale},
                          {"accept_final_window", b.accept_final_window},
                          {"accept_post", b.accept_post}});
    meta["blocks"] = std::move(blocks);
  }
  io::write_text(cfg.out_dir / "run_meta.json", meta.dump(2) + "\n");

  if (!quiet) {
    double rhat_max = 0.0;
    for (const auto& [name, value] : trace.rhat)
      rhat_max = std::max(rhat_max, value);
    std::fprintf(stderr,
                 "calibrate: %d chains x %d draws -> %s (max R-hat %.3f)\n",
                 trace.n_chains(), trace.chains.front().n_recorded(),
                 cfg.out_dir.string().c_str(), rhat_max);
  }
}

sampler::TraceSet load_traces(const std::filesystem::path& out_dir) {
  const auto meta_path = out_dir / "run_meta.json";
  require(std::filesystem::exists(meta_path), ErrorCode::io,
          "traces not found under " + out_dir.string() +
              "; run calibrate first");
  json meta;
  try {
    meta = json::parse(io::read_text(meta_path));
  } catch (const json::parse_error& e) {
    fail(ErrorCode::io, "unreadable run metadata: " + std::string(e.what()));
  }
  const int n_chains = meta.at("n_chains").get<int>();

  sampler::TraceSet trace;
  for (int k = 0; k < n_chains; ++k) {
    const auto path = out_dir / ("trace_chain" + std::to_string(k) + ".csv");
    require(std::filesystem::exists(path), ErrorCode::io,
            "traces not found under " + out_dir.string() +
                "; run calibrate first");
    io::Table t = io::read_csv(path);
    sampler::ChainTrace chain;
    chain.chain_index = k;
    chain.columns = t.columns;
    chain.draws = std::move(t.values);
    trace.chains.push_back(std::move(chain));
  }
  trace.columns = trace.chains.front().columns;
  for (const auto& chain : trace.chains)
    require(chain.columns == trace.columns, ErrorCode::io,
            "trace files disagree on their columns");
  return trace;
}

void predict(const config::RunConfig& cfg, bool quiet) {
  require(cfg.prediction_x.has_value(), ErrorCode::config,
          "prediction grid missing: add a \"prediction\" section");
  Run run = prepare(cfg);
  sampler::TraceSet trace = load_traces(cfg.out_dir);

  require(cfg.prediction_x->cols() == run.data.dim_x(), ErrorCode::config,
          "prediction points do not match the control-input dimension");
  Rng rng = Rng::for_stream(cfg.seed, kPredictStream);
  predict::PredictionResult result =
      predict::run(trace, run.data.scale_inputs(*cfg.prediction_x), run.spec,
                   run.data, run.single(), rng);

  const int m = static_cast<int>(result.mean.size());
  const int d = run.data.dim_x();
  io::Table summary;
  for (int j = 0; j < d; ++j)
    summary.columns.push_back("x" + std::to_string(j + 1));
  summary.columns.insert(summary.columns.end(),
                         {"mean", "lower95", "upper95"});
  summary.values.resize(m, d + 3);
  summary.values.leftCols(d) = *cfg.prediction_x;
  summary.values.col(d) = result.mean;
  summary.values.col(d + 1) = result.lower95;
  summary.values.col(d + 2) = result.upper95;
  io::write_csv(cfg.out_dir / "predictions.csv", summary);

  auto site_columns = [m]() {
    std::vector<std::string> cols;
    for (int j = 0; j < m; ++j)
      cols.push_back("site_" + std::to_string(j + 1));
    return cols;
  };
  io::write_csv(cfg.out_dir / "prediction_draws.csv",
                io::Table{site_columns(), result.draws});
  io::write_csv(cfg.out_dir / "theta1_path_draws.csv",
                io::Table{site_columns(), result.theta1_paths});

  if (!quiet)
    std::fprintf(stderr, "predict: %d sites x %d draws -> %s\n", m,
                 static_cast<int>(result.draws.rows()),
                 cfg.out_dir.string().c_str());
}

void diagnose(const config::RunConfig& cfg, bool quiet) {
  Run run = prepare(cfg);
  sampler::TraceSet trace = load_traces(cfg.out_dir);

  Rng rng = Rng::for_stream(cfg.seed, kDiagnoseStream);
  diagnostics::CheckReport report = diagnostics::bayes_pvalues(
      trace, run.spec, run.data, run.single(), cfg.diag_n_rep, rng);

  io::Table summary;
  summary.columns = {"t1_observed", "t2_observed", "t3_observed",
                     "p1",          "p2",          "p3",
                     "n_rep"};
  summary.values.resize(1, 7);
  summary.values << report.observed.t1, report.observed.t2, report.observed.t3,
      report.p1, report.p2, report.p3, static_cast<double>(report.n_rep);
  io::write_csv(cfg.out_dir / "diagnostics.csv", summary);
  io::write_csv(cfg.out_dir / "diagnostic_replicates.csv",
                io::Table{{"t1", "t2", "t3"}, report.replicates});

  if (!quiet)
    std::fprintf(stderr, "diagnose: p1=%.3f p2=%.3f p3=%.3f -> %s\n",
                 report.p1, report.p2, report.p3,
                 cfg.out_dir.string().c_str());
}

experiments::StudyReport run_study(const experiments::StudyConfig& cfg) {
  return experiments::run_study(cfg);
}

}  // namespace statecal::engine
