#include "experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <thread>

#include "diagnostics.hpp"
#include "error.hpp"
#include "io.hpp"
#include "linkfun.hpp"
#include "model.hpp"
#include "predict.hpp"
#include "traceview.hpp"

namespace statecal::experiments {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();
constexpr std::uint64_t kDataStream = 9001;
constexpr std::uint64_t kPredictStream = 1000003;
constexpr std::uint64_t kPathStream = 1000007;

const double kHoldoutX[] = {0.45, 0.50, 0.55, 0.60, 0.65};

Scenario base_scenario(const std::string& name) {
  Scenario s;
  s.name = name;
  return s;
}

double column_mean(const Eigen::MatrixXd& m, int j) { return m.col(j).mean(); }

double column_quantile(const Eigen::MatrixXd& m, int j, double q) {
  std::vector<double> v(m.col(j).data(), m.col(j).data() + m.rows());
  return predict::empirical_quantile(std::move(v), q);
}

double vec_mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double vec_sd(const std::vector<double>& v) {
  const double m = vec_mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

// Per-chain series of a derived scalar, for convergence diagnostics of
// reported (not sampled) quantities.
std::vector<Eigen::VectorXd> derived_series(
    const sampler::TraceSet& trace, const std::string& column,
    const std::function<double(double)>& f) {
  std::vector<Eigen::VectorXd> out;
  for (const auto& chain : trace.chains) {
    Eigen::VectorXd s = chain.series(column);
    for (int i = 0; i < s.size(); ++i) s[i] = f(s[i]);
    out.push_back(std::move(s));
  }
  return out;
}

std::string csv_field(const std::string& text) {
  std::string clean = text;
  for (char& c : clean)
    if (c == ',' || c == '\n' || c == '\r') c = ';';
  return clean;
}

}  // namespace

std::vector<Scenario> study_scenarios() {
  std::vector<Scenario> all;

  Scenario constrained = base_scenario("constrained_boundaries");
  constrained.c2_range = {1.0, 3.0};
  constrained.constrain_boundaries = true;
  constrained.in_variant_table = true;
  all.push_back(constrained);

  Scenario informative = base_scenario("informative_theta2");
  informative.in_variant_table = true;
  informative.in_link_table = true;  // doubles as the logit comparison row
  all.push_back(informative);

  Scenario parametric = base_scenario("parametric");
  parametric.variant = Variant::parametric_sqrt;
  parametric.in_variant_table = true;
  all.push_back(parametric);

  Scenario constant = base_scenario("constant");
  constant.variant = Variant::constant;
  constant.in_variant_table = true;
  all.push_back(constant);

  for (LinkKind link :
       {LinkKind::probit, LinkKind::cloglog, LinkKind::identity}) {
    Scenario s = base_scenario(linkfun::name(link));
    s.link = link;
    s.in_link_table = true;
    all.push_back(s);
  }

  Scenario vague = base_scenario("vague_priors");
  vague.c2_range = {1.0, 3.0};
  vague.track_mixing_quantities = true;
  all.push_back(vague);

  return all;
}

Scenario scenario_by_name(const std::string& name) {
  for (const Scenario& s : study_scenarios())
    if (s.name == name) return s;
  fail(ErrorCode::invalid_argument, "unknown scenario: " + name);
}

RawDataset generate_sim_data(std::uint64_t seed) {
  Rng rng = Rng::for_stream(seed, kDataStream);
  const int n = 20;
  RawDataset data;
  data.x.resize(n, 1);
  data.y.resize(n);
  for (int i = 0; i < n; ++i) {
    const double x = 0.05 * i;
    data.x(i, 0) = x;
    data.y[i] = 2.0 * std::sqrt(x) + 2.5 * x * x + 0.05 * rng.normal();
  }
  return data;
}

void holdout_split(const RawDataset& all, RawDataset& train, RawDataset& test) {
  require(all.x.cols() == 1, ErrorCode::invalid_argument,
          "holdout split expects a single control input");
  std::vector<int> test_rows, train_rows;
  for (int i = 0; i < all.x.rows(); ++i) {
    const double x = all.x(i, 0);
    const bool held = std::any_of(
        std::begin(kHoldoutX), std::end(kHoldoutX),
        [x](double h) { return std::abs(x - h) < 1e-9; });
    (held ? test_rows : train_rows).push_back(i);
  }
  require(test_rows.size() == 5, ErrorCode::invalid_argument,
          "study grid lacks the five validation sites 0.45..0.65");
  require(train_rows.size() == 15, ErrorCode::invalid_argument,
          "study grid must leave 15 training rows");

  auto take = [&](const std::vector<int>& rows) {
    RawDataset out;
    out.x.resize(static_cast<int>(rows.size()), all.x.cols());
    out.y.resize(static_cast<int>(rows.size()));
    for (size_t k = 0; k < rows.size(); ++k) {
      out.x.row(static_cast<int>(k)) = all.x.row(rows[k]);
      out.y[static_cast<int>(k)] = all.y[rows[k]];
    }
    return out;
  };
  train = take(train_rows);
  test = take(test_rows);
}

ModelSpec scenario_spec(const Scenario& s) {
  ModelSpec spec;
  spec.variant = s.variant;
  spec.link = s.link;
  spec.hyper.a_y = 5.0;
  spec.hyper.b_y = 5.0;
  spec.hyper.a_lambda_theta = default_a_lambda_theta(s.link);
  spec.hyper.b_lambda_theta = spec.hyper.a_lambda_theta;
  spec.hyper.b_rho = 0.2;

  ParameterSpec c1;
  c1.name = "c1";
  c1.role = s.variant == Variant::constant ? ParameterSpec::Role::constant
                                           : ParameterSpec::Role::functional;
  c1.lower = s.c1_range.lo;
  c1.upper = s.c1_range.hi;
  if (s.constrain_boundaries) {
    PathConstraint left;
    left.x_scaled = Eigen::VectorXd::Constant(1, 0.0);
    left.lower = -0.075;
    left.upper = 0.075;
    PathConstraint right;
    right.x_scaled = Eigen::VectorXd::Constant(1, 0.95);
    right.lower = 1.85;
    right.upper = 2.05;
    c1.constraints = {left, right};
  }
  spec.parameters.push_back(c1);

  ParameterSpec c2;
  c2.name = "c2";
  c2.role = ParameterSpec::Role::constant;
  c2.lower = s.c2_range.lo;
  c2.upper = s.c2_range.hi;
  spec.parameters.push_back(c2);

  spec.validate();
  return spec;
}

std::uint64_t scenario_seed(std::uint64_t study_seed, const std::string& name) {
  std::uint64_t h = 1469598103934665603ull;  // FNV-1a over the name
  for (unsigned char c : name) {
    h ^= c;
    h *= 1099511628211ull;
  }
  std::uint64_t x = study_seed ^ h;
  x ^= x >> 30;
  x *= 0xbf58476d1ce4e5b9ull;
  x ^= x >> 27;
  x *= 0x94d049bb133111ebull;
  x ^= x >> 31;
  return x;
}

ScenarioReport run_scenario(const Scenario& s, const RawDataset& train,
                            const RawDataset& test,
                            const sampler::ChainConfig& chain_config,
                            bool parallel_chains) {
  const auto t0 = std::chrono::steady_clock::now();

  FieldDataset data = standardize(train, {Bounds{0.0, 1.0}});
  ModelSpec spec = scenario_spec(s);
  auto sim = make_builtin_simulator("quadratic");

  sampler::TraceSet trace = sampler::run_chains(
      spec, data, [&](int) -> Simulator& { return *sim; }, chain_config,
      parallel_chains);

  ScenarioReport rep;
  rep.scenario = s;

  Rng rng_pred = Rng::for_stream(chain_config.seed, kPredictStream);
  const Eigen::MatrixXd x_new_scaled = data.scale_inputs(test.x);
  predict::PredictionResult pred =
      predict::run(trace, x_new_scaled, spec, data, *sim, rng_pred);
  rep.x_test = test.x.col(0);
  rep.y_test = test.y;
  rep.pred_mean = pred.mean;
  rep.pred_lower = pred.lower95;
  rep.pred_upper = pred.upper95;
  rep.rmspe = diagnostics::rmspe(pred.mean, test.y);

  const ParameterSpec& c1 = spec.theta1();
  const ParameterSpec& c2 = spec.theta2();

  if (s.variant != Variant::constant) {
    const int m = static_cast<int>(train.x.rows() + test.x.rows());
    std::vector<std::pair<double, int>> sites;  // (x, is_holdout)
    for (int i = 0; i < train.x.rows(); ++i) sites.push_back({train.x(i, 0), 0});
    for (int i = 0; i < test.x.rows(); ++i) sites.push_back({test.x(i, 0), 1});
    std::sort(sites.begin(), sites.end());
    rep.grid_x.resize(m);
    rep.grid_is_holdout.resize(m);
    Eigen::MatrixXd grid_raw(m, 1);
    for (int i = 0; i < m; ++i) {
      rep.grid_x[i] = sites[i].first;
      rep.grid_is_holdout[i] = sites[i].second;
      grid_raw(i, 0) = sites[i].first;
    }
    Rng rng_path = Rng::for_stream(chain_config.seed, kPathStream);
    const Eigen::MatrixXd paths = predict::extract_theta1_posterior(
        trace, data.scale_inputs(grid_raw), spec, data, rng_path);
    rep.path_mean.resize(m);
    rep.path_lower.resize(m);
    rep.path_upper.resize(m);
    for (int j = 0; j < m; ++j) {
      rep.path_mean[j] = column_mean(paths, j);
      rep.path_lower[j] = column_quantile(paths, j, 0.025);
      rep.path_upper[j] = column_quantile(paths, j, 0.975);
    }
  }

  TraceView view(trace, spec, data.n());
  std::vector<double> c2_draws(view.n_draws());
  for (int k = 0; k < view.n_draws(); ++k)
    c2_draws[k] = c2.unscale(*view.draw(k).theta2_unit());
  rep.c2_mean = vec_mean(c2_draws);
  rep.c2_lower = predict::empirical_quantile(c2_draws, 0.025);
  rep.c2_upper = predict::empirical_quantile(c2_draws, 0.975);
  // Convergence table over the quantities the report summarizes, on their
  // reported scales; per-column values for the raw sampler coordinates stay
  // in trace.rhat and go out with the trace artifacts.
  rep.rhat["c2"] = sampler::rhat(derived_series(
      trace, "xi", [&](double xi) { return c2.unscale(model::theta2_from_xi(xi)); }));
  if (s.variant == Variant::gp) {
    for (int row = 1; row <= data.n(); ++row) {
      rep.rhat["c1_x" + std::to_string(row)] = sampler::rhat(derived_series(
          trace, "z_" + std::to_string(row),
          [&](double z) { return c1.unscale(linkfun::invert(spec.link, z)); }));
    }
  }

  if (s.variant == Variant::constant) {
    std::vector<double> c1_draws(view.n_draws());
    for (int k = 0; k < view.n_draws(); ++k) {
      const DrawView d = view.draw(k);
      c1_draws[k] = c1.unscale(std::exp(-std::exp(d.w)));
    }
    rep.c1_mean = vec_mean(c1_draws);
    rep.c1_sd = vec_sd(c1_draws);
    rep.c1_lower = predict::empirical_quantile(c1_draws, 0.025);
    rep.c1_upper = predict::empirical_quantile(c1_draws, 0.975);
    rep.rhat["c1"] = sampler::rhat(derived_series(trace, "w", [&](double w) {
      return c1.unscale(std::exp(-std::exp(w)));
    }));
  }

  if (s.variant == Variant::parametric_sqrt) {
    const double span = c1.upper - c1.lower;
    double b0 = 0.0, b1 = 0.0;
    for (int k = 0; k < view.n_draws(); ++k) {
      const DrawView d = view.draw(k);
      b0 += d.beta0;
      b1 += d.beta1;
    }
    b0 /= view.n_draws();
    b1 /= view.n_draws();
    rep.beta0_mean = c1.lower + span * b0;
    rep.beta1_mean = span * b1;
    rep.rhat["beta0"] = sampler::rhat(derived_series(
        trace, "beta0", [&](double b) { return c1.lower + span * b; }));
    rep.rhat["beta1"] = sampler::rhat(
        derived_series(trace, "beta1", [&](double b) { return span * b; }));
  }


  rep.trace = std::move(trace);
  rep.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  return rep;
}

void write_scenario_artifacts(const ScenarioReport& rep,
                              const std::filesystem::path& dir) {
  io::ensure_dir(dir);
  const Scenario& s = rep.scenario;

  for (const auto& chain : rep.trace.chains) {
    io::Table t{chain.columns, chain.draws};
    io::write_csv(dir / ("trace_chain" + std::to_string(chain.chain_index) +
                         ".csv"),
                  t);
  }

  {
    io::Table t;
    t.values.resize(1, static_cast<int>(rep.rhat.size()));
    int j = 0;
    for (const auto& [name, value] : rep.rhat) {
      t.columns.push_back(name);
      t.values(0, j++) = value;
    }
    io::write_csv(dir / "rhat.csv", t);
  }

  {
    // Raw sampler coordinates (per trace column), kept separate from the
    // reported-quantity table above.
    io::Table t;
    t.values.resize(1, static_cast<int>(rep.trace.rhat.size()));
    int j = 0;
    for (const auto& [name, value] : rep.trace.rhat) {
      t.columns.push_back(name);
      t.values(0, j++) = value;
    }
    io::write_csv(dir / "trace_rhat.csv", t);
  }

  {
    std::ostringstream out;
    out << "chain,block,target,scale,accept_final_window,accept_burn_tail,"
           "accept_post\n";
    for (const auto& chain : rep.trace.chains)
      for (const auto& b : chain.blocks)
        out << chain.chain_index << ',' << b.name << ','
            << (b.scalar_target ? "scalar" : "block") << ','
            << io::format_double(b.scale) << ','
            << io::format_double(b.accept_final_window) << ','
            << io::format_double(b.accept_burn_tail) << ','
            << io::format_double(b.accept_post) << '\n';
    io::write_text(dir / "acceptance.csv", out.str());
  }

  {
    io::Table t;
    t.columns = {"x", "y_held_out", "mean", "lower95", "upper95"};
    t.values.resize(rep.x_test.size(), 5);
    t.values.col(0) = rep.x_test;
    t.values.col(1) = rep.y_test;
    t.values.col(2) = rep.pred_mean;
    t.values.col(3) = rep.pred_lower;
    t.values.col(4) = rep.pred_upper;
    io::write_csv(dir / "prediction.csv", t);
  }

  if (rep.grid_x.size() > 0) {
    io::Table t;
    t.columns = {"x", "is_holdout", "mean", "lower95", "upper95"};
    t.values.resize(rep.grid_x.size(), 5);
    t.values.col(0) = rep.grid_x;
    t.values.col(1) = rep.grid_is_holdout;
    t.values.col(2) = rep.path_mean;
    t.values.col(3) = rep.path_lower;
    t.values.col(4) = rep.path_upper;
    io::write_csv(dir / "path.csv", t);
  }

  {
    io::Table t;
    t.columns = {"rmspe",    "c2_mean",  "c2_lower95", "c2_upper95",
                 "c1_min",   "c1_max",   "c2_min",     "c2_max"};
    std::vector<double> row{rep.rmspe,         rep.c2_mean,
                            rep.c2_lower,      rep.c2_upper,
                            s.c1_range.lo,     s.c1_range.hi,
                            s.c2_range.lo,     s.c2_range.hi};
    if (s.variant == Variant::constant) {
      for (const char* name :
           {"c1_mean", "c1_sd", "c1_lower95", "c1_upper95"})
        t.columns.push_back(name);
      row.insert(row.end(), {rep.c1_mean, rep.c1_sd, rep.c1_lower, rep.c1_upper});
    }
    if (s.variant == Variant::parametric_sqrt) {
      t.columns.push_back("beta0_mean");
      t.columns.push_back("beta1_mean");
      row.insert(row.end(), {rep.beta0_mean, rep.beta1_mean});
    }
    t.values = Eigen::Map<Eigen::RowVectorXd>(row.data(),
                                              static_cast<int>(row.size()));
    io::write_csv(dir / "summary.csv", t);
  }

  io::write_text(dir / "runtime.txt",
                 io::format_double(rep.seconds) + " s\n");
}

const StudyReport::Row& StudyReport::row(const std::string& name) const {
  for (const Row& r : rows)
    if (r.name == name) return r;
  fail(ErrorCode::invalid_argument, "study has no scenario named " + name);
}

bool StudyReport::all_ok() const {
  return std::all_of(rows.begin(), rows.end(),
                     [](const Row& r) { return r.ok; });
}

StudyReport run_study(const StudyConfig& config) {
  config.chain.validate();
  require(!config.out_dir.empty(), ErrorCode::config,
          "study output directory is empty");
  io::ensure_dir(config.out_dir);

  const RawDataset all = generate_sim_data(config.seed);
  RawDataset train, test;
  holdout_split(all, train, test);

  const std::vector<Scenario> scenarios = study_scenarios();
  StudyReport report;
  report.rows.resize(scenarios.size());

  auto run_one = [&](size_t i) {
    const Scenario& s = scenarios[i];
    StudyReport::Row row;
    row.name = s.name;
    row.rmspe = kNan;
    row.c2_mean = row.c2_lower = row.c2_upper = kNan;
    try {
      sampler::ChainConfig cc = config.chain;
      cc.seed = scenario_seed(config.seed, s.name);
      ScenarioReport rep =
          run_scenario(s, train, test, cc, config.parallel_chains);
      write_scenario_artifacts(rep, config.out_dir / s.name);
      row.ok = true;
      row.rmspe = rep.rmspe;
      row.c2_mean = rep.c2_mean;
      row.c2_lower = rep.c2_lower;
      row.c2_upper = rep.c2_upper;
      row.rhat = rep.rhat;
      row.seconds = rep.seconds;
      if (!config.quiet) {
        std::fprintf(stderr, "[study] %-24s rmspe=%.4f  (%.2fs)\n",
                     s.name.c_str(), rep.rmspe, rep.seconds);
        if (s.track_mixing_quantities)
          for (const char* q : {"c2", "c1_x10", "c1_x15"})
            if (auto it = rep.rhat.find(q); it != rep.rhat.end())
              std::fprintf(stderr, "[study] %-24s   R-hat(%s) = %.3f\n",
                           s.name.c_str(), q, it->second);
      }
    } catch (const std::exception& e) {
      row.ok = false;
      row.error = e.what();
      if (!config.quiet)
        std::fprintf(stderr, "[study] %-24s FAILED: %s\n", s.name.c_str(),
                     e.what());
    }
    report.rows[i] = std::move(row);
  };

  if (config.parallel_scenarios) {
    std::vector<std::thread> threads;
    threads.reserve(scenarios.size());
    for (size_t i = 0; i < scenarios.size(); ++i)
      threads.emplace_back(run_one, i);
    for (auto& t : threads) t.join();
  } else {
    for (size_t i = 0; i < scenarios.size(); ++i) run_one(i);
  }

  // Variant-comparison summary, one column per model variant.
  {
    io::Table t;
    t.columns = {"parametric", "constrained_boundaries", "informative_theta2",
                 "constant"};
    t.values.resize(1, 4);
    for (int j = 0; j < 4; ++j) t.values(0, j) = report.row(t.columns[j]).rmspe;
    io::write_csv(config.out_dir / "table_variants.csv", t);
  }
  // Link-comparison summary; the logit column is the informative-theta2 row.
  {
    io::Table t;
    t.columns = {"logit", "probit", "cloglog", "identity"};
    t.values.resize(1, 4);
    t.values(0, 0) = report.row("informative_theta2").rmspe;
    for (int j = 1; j < 4; ++j) t.values(0, j) = report.row(t.columns[j]).rmspe;
    io::write_csv(config.out_dir / "table_links.csv", t);
  }

  {
    std::ostringstream out;
    out << "scenario,status,error,rmspe,c2_mean,c2_lower95,c2_upper95,"
           "rhat_max\n";
    for (const auto& row : report.rows) {
      double rhat_max = kNan;
      for (const auto& [name, value] : row.rhat)
        if (std::isnan(rhat_max) || value > rhat_max) rhat_max = value;
      out << row.name << ',' << (row.ok ? "ok" : "failed") << ','
          << csv_field(row.error) << ',' << io::format_double(row.rmspe) << ','
          << io::format_double(row.c2_mean) << ','
          << io::format_double(row.c2_lower) << ','
          << io::format_double(row.c2_upper) << ','
          << io::format_double(rhat_max) << '\n';
    }
    io::write_text(config.out_dir / "study_summary.csv", out.str());
  }

  {
    std::ostringstream out;
    double total = 0.0;
    for (const auto& row : report.rows) {
      out << row.name << ": " << io::format_double(row.seconds) << " s\n";
      total += row.seconds;
    }
    out << "total: " << io::format_double(total) << " s\n";
    io::write_text(config.out_dir / "study_runtime.txt", out.str());
  }

  return report;
}

VpscExample vpsc_example_config() {
  VpscExample ex;
  ex.data.x.resize(6, 1);
  ex.data.x << 200.0, 300.0, 350.0, 400.0, 500.0, 550.0;
  ex.data.y.resize(6);
  ex.data.y << 226.2, 91.4, 50.0, 30.6, 14.9, 7.0;
  ex.x_bounds = {Bounds{180.0, 570.0}};

  ModelSpec spec;
  spec.variant = Variant::gp;
  spec.link = LinkKind::identity;
  spec.hyper.a_y = 5.0;
  spec.hyper.b_y = 5.0;
  spec.hyper.a_lambda_theta = default_a_lambda_theta(spec.link);
  spec.hyper.b_lambda_theta = spec.hyper.a_lambda_theta;
  spec.hyper.b_rho = 0.2;

  ParameterSpec tau0;
  tau0.name = "tau0";
  tau0.role = ParameterSpec::Role::functional;
  tau0.lower = 1.20;
  tau0.upper = 1343.40;
  const double x_lo = ex.x_bounds[0].lo, x_hi = ex.x_bounds[0].hi;
  PathConstraint cold;
  cold.x_scaled =
      Eigen::VectorXd::Constant(1, (200.0 - x_lo) / (x_hi - x_lo));
  cold.lower = 519.03;
  cold.upper = 693.07;
  PathConstraint hot;
  hot.x_scaled = Eigen::VectorXd::Constant(1, (550.0 - x_lo) / (x_hi - x_lo));
  hot.lower = 7.78;
  hot.upper = 42.15;
  tau0.constraints = {cold, hot};
  spec.parameters.push_back(tau0);

  ParameterSpec n_g;
  n_g.name = "n_g";
  n_g.role = ParameterSpec::Role::constant;
  n_g.lower = 2.50;
  n_g.upper = 4.50;
  spec.parameters.push_back(n_g);

  spec.validate();
  ex.spec = spec;
  return ex;
}

}  // namespace statecal::experiments
