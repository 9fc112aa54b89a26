#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <limits>

#include "dataset.hpp"
#include "error.hpp"
#include "experiments.hpp"
#include "gp.hpp"
#include "linkfun.hpp"
#include "model.hpp"
#include "modelspec.hpp"
#include "rng.hpp"
#include "sampler.hpp"
#include "simulator.hpp"

using namespace statecal;
namespace sampler = statecal::sampler;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

ModelSpec gp_study_spec() {
  ModelSpec spec;
  spec.variant = Variant::gp;
  spec.link = LinkKind::logit;
  ParameterSpec c1;
  c1.name = "c1";
  c1.role = ParameterSpec::Role::functional;
  c1.lower = -0.5;
  c1.upper = 2.5;
  spec.parameters.push_back(c1);
  ParameterSpec c2;
  c2.name = "c2";
  c2.lower = 1.0;
  c2.upper = 3.0;
  spec.parameters.push_back(c2);
  spec.validate();
  return spec;
}

FieldDataset training_data(std::uint64_t seed = 551) {
  RawDataset all = experiments::generate_sim_data(seed);
  RawDataset train, test;
  experiments::holdout_split(all, train, test);
  return standardize(train, {Bounds{0.0, 1.0}});
}

sampler::ChainConfig tiny_config(std::uint64_t seed) {
  sampler::ChainConfig c;
  c.n_burn = 200;
  c.n_post = 200;
  c.thin = 2;
  c.n_chains = 2;
  c.adapt_interval = 50;
  c.seed = seed;
  return c;
}

}  // namespace

TEST_CASE("propose_theta1_block draws candidate = z + c S eps") {
  Rng rng(5);
  Eigen::VectorXd z(3);
  z << 1.0, -2.0, 0.5;

  const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(3, 3);
  CHECK(sampler::propose_theta1_block(z, eye, 0.0, rng) == z);

  // Identity root: mean z, covariance c^2 I.
  const double c = 0.7;
  const int n = 60000;
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(3);
  Eigen::MatrixXd second = Eigen::MatrixXd::Zero(3, 3);
  for (int i = 0; i < n; ++i) {
    const Eigen::VectorXd v = sampler::propose_theta1_block(z, eye, c, rng) - z;
    mean += v;
    second += v * v.transpose();
  }
  mean /= n;
  second /= n;
  CHECK(mean.cwiseAbs().maxCoeff() < 4.0 * c / std::sqrt(double(n)));
  CHECK((second - c * c * eye).cwiseAbs().maxCoeff() < 0.02);

  // Correlated root: covariance c^2 S S^T.
  Eigen::MatrixXd x(4, 1);
  x << 0.0, 0.3, 0.6, 0.9;
  const gp::CorrFactors f(x, 0.9);
  const Eigen::MatrixXd s = f.sample_root();
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(4, 4);
  Eigen::VectorXd z4 = Eigen::VectorXd::Zero(4);
  for (int i = 0; i < n; ++i) {
    const Eigen::VectorXd v = sampler::propose_theta1_block(z4, s, 0.4, rng);
    cov += v * v.transpose();
  }
  cov /= n;
  CHECK((cov - 0.16 * s * s.transpose()).cwiseAbs().maxCoeff() < 0.01);
}

TEST_CASE("mh_accept follows the Metropolis rule") {
  Rng rng(11);
  for (int i = 0; i < 1000; ++i) {
    CHECK(sampler::mh_accept(1.3, 1.0, rng));       // uphill always
    CHECK(sampler::mh_accept(-4.0, -4.0, rng));     // ties always
    CHECK_FALSE(sampler::mh_accept(-kInf, -2.0, rng));
    CHECK(sampler::mh_accept(-2.0, -kInf, rng));
  }
  // Downhill by log 2: accept with probability exactly 1/2.
  int acc = 0;
  const int n = 100000;
  for (int i = 0; i < n; ++i)
    acc += sampler::mh_accept(std::log(0.5), 0.0, rng) ? 1 : 0;
  CHECK(std::abs(acc / double(n) - 0.5) < 0.005);
}

TEST_CASE("adapt_scale nudges by the fixed factor") {
  CHECK(sampler::adapt_scale(2.0, 0.1, 0.4, 0.5) == doctest::Approx(2.0 / 1.1));
  CHECK(sampler::adapt_scale(2.0, 0.8, 0.4, 0.5) == doctest::Approx(2.2));
  CHECK(sampler::adapt_scale(2.0, 0.45, 0.4, 0.5) == 2.0);
  CHECK(sampler::adapt_scale(2.0, 0.4, 0.4, 0.5) == 2.0);  // closed interval
  CHECK(sampler::adapt_scale(2.0, 0.5, 0.4, 0.5) == 2.0);
}

TEST_CASE("split-chain rhat separates mixed from stuck chains") {
  Rng rng(23);
  std::vector<Eigen::VectorXd> iid;
  for (int c = 0; c < 4; ++c) {
    Eigen::VectorXd v(2000);
    for (int i = 0; i < v.size(); ++i) v(i) = rng.normal();
    iid.push_back(v);
  }
  const double r = sampler::rhat(iid);
  CHECK(r >= 0.99);
  CHECK(r <= 1.05);

  // Same-spread chains five sd apart.
  std::vector<Eigen::VectorXd> split = iid;
  split[0].array() += 5.0;
  CHECK(sampler::rhat(split) > 1.5);

  // Distinct constants: zero within-variance.
  std::vector<Eigen::VectorXd> constants{Eigen::VectorXd::Zero(50),
                                         Eigen::VectorXd::Constant(50, 5.0)};
  CHECK(std::isinf(sampler::rhat(constants)));

  // Identical constants are converged by convention.
  std::vector<Eigen::VectorXd> same{Eigen::VectorXd::Constant(50, 2.0),
                                    Eigen::VectorXd::Constant(50, 2.0)};
  CHECK(sampler::rhat(same) == 1.0);

  CHECK_THROWS_AS((void)sampler::rhat({Eigen::VectorXd::Zero(50)}), Error);
  CHECK_THROWS_AS((void)sampler::rhat({Eigen::VectorXd::Zero(9),
                                       Eigen::VectorXd::Zero(9)}),
                  Error);
}

TEST_CASE("chain configuration validates and counts recorded draws") {
  sampler::ChainConfig c;
  CHECK(c.n_recorded() == 2000);  // 4000 post / thin 2
  CHECK_NOTHROW(c.validate());

  c.thin = 4;
  CHECK(c.n_recorded() == 1000);
  CHECK_NOTHROW(c.validate());

  sampler::ChainConfig bad = sampler::ChainConfig{};
  bad.n_burn = 0;
  CHECK_THROWS_AS(bad.validate(), Error);
  bad = sampler::ChainConfig{};
  bad.thin = 0;
  CHECK_THROWS_AS(bad.validate(), Error);
  bad = sampler::ChainConfig{};
  bad.thin = 3;  // does not divide 4000
  CHECK_THROWS_AS(bad.validate(), Error);
  bad = sampler::ChainConfig{};
  bad.n_chains = 0;
  CHECK_THROWS_AS(bad.validate(), Error);
  bad = sampler::ChainConfig{};
  bad.adapt_interval = 0;
  CHECK_THROWS_AS(bad.validate(), Error);
  bad = sampler::ChainConfig{};
  bad.target_scalar_lo = 0.6;  // inverted interval
  CHECK_THROWS_AS(bad.validate(), Error);
  bad = sampler::ChainConfig{};
  bad.n_post = -2;
  CHECK_THROWS_AS(bad.validate(), Error);
}

TEST_CASE("initialize_state starts inside the support") {
  const FieldDataset data = training_data();

  ModelSpec spec = gp_study_spec();
  PathConstraint first;
  first.x_scaled = Eigen::VectorXd::Constant(1, 0.0);
  first.lower = -0.075;
  first.upper = 0.075;
  PathConstraint last;
  last.x_scaled = Eigen::VectorXd::Constant(1, 0.95);
  last.lower = 1.85;
  last.upper = 2.05;
  spec.parameters[0].constraints = {first, last};
  spec.validate();

  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    Rng rng(seed);
    const sampler::ChainState s = sampler::initialize_state(spec, data, rng);
    REQUIRE(s.z.size() == data.n());
    CHECK(s.lambda_y > 0.0);
    CHECK(s.lambda_theta > 0.0);
    REQUIRE(s.xi.has_value());
    const double raw0 = spec.theta1().unscale(linkfun::invert(spec.link, s.z(0)));
    const double raw14 =
        spec.theta1().unscale(linkfun::invert(spec.link, s.z(data.n() - 1)));
    CHECK(raw0 > first.lower);
    CHECK(raw0 < first.upper);
    CHECK(raw14 > last.lower);
    CHECK(raw14 < last.upper);
  }

  // Identity link: every start coordinate must be a valid unit value.
  ModelSpec ident = gp_study_spec();
  ident.link = LinkKind::identity;
  ident.hyper.a_lambda_theta = default_a_lambda_theta(LinkKind::identity);
  ident.hyper.b_lambda_theta = ident.hyper.a_lambda_theta;
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    Rng rng(1000 + seed);
    const sampler::ChainState s = sampler::initialize_state(ident, data, rng);
    CHECK(s.z.minCoeff() >= 0.0);
    CHECK(s.z.maxCoeff() <= 1.0);
  }

  // Same stream, same start.
  Rng a(77), b(77);
  const sampler::ChainState sa = sampler::initialize_state(spec, data, a);
  const sampler::ChainState sb = sampler::initialize_state(spec, data, b);
  CHECK(sa.z == sb.z);
  CHECK(sa.lambda_y == sb.lambda_y);
  CHECK(sa.nu == sb.nu);
}

TEST_CASE("run_chains emits the documented trace layout deterministically") {
  const FieldDataset data = training_data();
  const ModelSpec spec = gp_study_spec();
  auto sim = make_builtin_simulator("quadratic");
  auto for_chain = [&](int) -> Simulator& { return *sim; };

  const sampler::ChainConfig config = tiny_config(99);
  const sampler::TraceSet set =
      sampler::run_chains(spec, data, for_chain, config, false);

  REQUIRE(set.n_chains() == 2);
  REQUIRE(set.columns.size() ==
          static_cast<size_t>(1 + data.n() + 1 + 2 + 1 + 1));
  CHECK(set.columns.front() == "iteration");
  CHECK(set.columns[1] == "z_1");
  CHECK(set.columns[data.n()] == "z_15");
  CHECK(set.columns[data.n() + 1] == "xi");
  CHECK(set.columns[data.n() + 2] == "nu");
  CHECK(set.columns[data.n() + 3] == "lambda_theta");
  CHECK(set.columns[data.n() + 4] == "lambda_y");
  CHECK(set.columns.back() == "log_post");

  for (const auto& chain : set.chains) {
    CHECK(chain.n_recorded() == config.n_recorded());
    // Recorded iterations start after burn-in and stride by thin.
    const Eigen::VectorXd it = chain.series("iteration");
    CHECK(it(0) == doctest::Approx(config.n_burn + config.thin));
    CHECK(it(it.size() - 1) == doctest::Approx(config.n_burn + config.n_post));
    CHECK(chain.series("lambda_y").minCoeff() > 0.0);
    CHECK(chain.series("lambda_theta").minCoeff() > 0.0);
    CHECK(chain.series("log_post").allFinite());
    REQUIRE(chain.blocks.size() == 3);
    CHECK(chain.blocks[0].name == "theta1");
    CHECK(chain.blocks[1].name == "xi");
    CHECK(chain.blocks[2].name == "nu");
    CHECK_FALSE(chain.blocks[0].scalar_target);
    CHECK(chain.blocks[1].scalar_target);
  }
  CHECK(set.n_combined() == 2 * config.n_recorded());
  CHECK(set.combined("nu").size() == 2 * config.n_recorded());
  CHECK(set.rhat.count("lambda_y") == 1);
  CHECK(set.rhat.count("iteration") == 0);
  CHECK_THROWS_AS((void)set.chains[0].column("no_such"), Error);

  // Bit-identical rerun, including across the threaded path.
  const sampler::TraceSet again =
      sampler::run_chains(spec, data, for_chain, config, false);
  auto sim2 = make_builtin_simulator("quadratic");
  auto for_chain2 = [&](int) -> Simulator& { return *sim2; };
  const sampler::TraceSet threaded =
      sampler::run_chains(spec, data, for_chain2, config, true);
  for (int c = 0; c < 2; ++c) {
    CHECK(set.chains[c].draws == again.chains[c].draws);
    CHECK(set.chains[c].draws == threaded.chains[c].draws);
  }

  // A different seed moves the draws.
  sampler::ChainConfig other = config;
  other.seed = 100;
  const sampler::TraceSet moved =
      sampler::run_chains(spec, data, for_chain, other, false);
  CHECK(set.chains[0].draws != moved.chains[0].draws);

  // n_post = 0 still burns but records nothing.
  sampler::ChainConfig empty = config;
  empty.n_post = 0;
  const sampler::TraceSet none =
      sampler::run_chains(spec, data, for_chain, empty, false);
  CHECK(none.chains[0].n_recorded() == 0);
  CHECK(none.rhat.empty());
}

TEST_CASE("recorded states respect path constraints throughout") {
  const FieldDataset data = training_data();
  ModelSpec spec = gp_study_spec();
  PathConstraint first;
  first.x_scaled = Eigen::VectorXd::Constant(1, 0.0);
  first.lower = -0.075;
  first.upper = 0.075;
  PathConstraint last;
  last.x_scaled = Eigen::VectorXd::Constant(1, 0.95);
  last.lower = 1.85;
  last.upper = 2.05;
  spec.parameters[0].constraints = {first, last};
  spec.validate();

  auto sim = make_builtin_simulator("quadratic");
  auto for_chain = [&](int) -> Simulator& { return *sim; };
  const sampler::TraceSet set =
      sampler::run_chains(spec, data, for_chain, tiny_config(3), false);

  for (const auto& chain : set.chains) {
    const Eigen::VectorXd z0 = chain.series("z_1");
    const Eigen::VectorXd z14 = chain.series("z_15");
    for (Eigen::Index i = 0; i < z0.size(); ++i) {
      const double r0 = spec.theta1().unscale(linkfun::invert(spec.link, z0(i)));
      const double r14 =
          spec.theta1().unscale(linkfun::invert(spec.link, z14(i)));
      CHECK(r0 > first.lower);
      CHECK(r0 < first.upper);
      CHECK(r14 > last.lower);
      CHECK(r14 < last.upper);
    }
  }
}

TEST_CASE("variant-specific traces expose their own coordinates") {
  const FieldDataset data = training_data();
  auto sim = make_builtin_simulator("quadratic");
  auto for_chain = [&](int) -> Simulator& { return *sim; };

  ModelSpec par = gp_study_spec();
  par.variant = Variant::parametric_sqrt;
  par.validate();
  const sampler::TraceSet pset =
      sampler::run_chains(par, data, for_chain, tiny_config(7), false);
  CHECK(pset.columns == std::vector<std::string>{"iteration", "beta0", "beta1",
                                                 "xi", "lambda_y", "log_post"});
  // beta coordinates live on the scaled theta axis: the implied path must
  // stay inside the unit box at every design point, else SSR would reject.
  const Eigen::VectorXd b0 = pset.chains[0].series("beta0");
  const Eigen::VectorXd b1 = pset.chains[0].series("beta1");
  for (Eigen::Index i = 0; i < b0.size(); ++i) {
    for (int j = 0; j < data.n(); ++j) {
      const double u = b0(i) + b1(i) * std::sqrt(data.x_scaled(j, 0));
      CHECK(u > 0.0);
      CHECK(u < 1.0);
    }
  }
  CHECK(pset.chains[0].blocks[0].name == "beta");

  ModelSpec cst = gp_study_spec();
  cst.variant = Variant::constant;
  cst.validate();
  const sampler::TraceSet cset =
      sampler::run_chains(cst, data, for_chain, tiny_config(7), false);
  CHECK(cset.columns == std::vector<std::string>{"iteration", "w", "xi",
                                                 "lambda_y", "log_post"});
  // w = log(-log theta1_unit) is finite wherever theta1_unit is in (0,1).
  CHECK(cset.combined("w").allFinite());
}

TEST_CASE("two-state Metropolis chain reproduces its target distribution") {
  // Target pi = (1/4, 3/4) with a deterministic flip proposal; stationarity
  // follows from detailed balance, which mh_accept must implement.
  Rng rng(29);
  const double logp[2] = {std::log(0.25), std::log(0.75)};
  int state = 0;
  int visits1 = 0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const int cand = 1 - state;
    if (sampler::mh_accept(logp[cand], logp[state], rng)) state = cand;
    visits1 += state;
  }
  CHECK(std::abs(visits1 / double(n) - 0.75) < 0.01);
}

TEST_CASE("short constant-variant run concentrates near the sample mean") {
  // Single constant parameter eta = theta1 with a conjugate-like posterior:
  // the chain mean of theta1 should sit near the raw-data mean.
  RawDataset raw;
  raw.x.resize(8, 1);
  raw.y.resize(8);
  Rng noise(13);
  for (int i = 0; i < 8; ++i) {
    raw.x(i, 0) = 0.1 * (i + 1);
    raw.y(i) = 1.4 + 0.05 * noise.normal();
  }
  const FieldDataset data = standardize(raw, {Bounds{0.0, 1.0}});

  ModelSpec spec;
  spec.variant = Variant::constant;
  spec.link = LinkKind::logit;
  ParameterSpec t;
  t.name = "t";
  t.role = ParameterSpec::Role::functional;
  t.lower = 0.0;
  t.upper = 3.0;
  spec.parameters.push_back(t);
  spec.validate();

  auto sim = make_builtin_simulator("offset");
  auto for_chain = [&](int) -> Simulator& { return *sim; };
  sampler::ChainConfig config;
  config.n_burn = 500;
  config.n_post = 1000;
  config.thin = 2;
  config.n_chains = 2;
  config.seed = 17;
  const sampler::TraceSet set =
      sampler::run_chains(spec, data, for_chain, config, false);

  const Eigen::VectorXd w = set.combined("w");
  double mean_theta1 = 0.0;
  for (Eigen::Index i = 0; i < w.size(); ++i)
    mean_theta1 += spec.theta1().unscale(std::exp(-std::exp(w(i))));
  mean_theta1 /= static_cast<double>(w.size());
  CHECK(mean_theta1 == doctest::Approx(raw.y.mean()).epsilon(0.05));
}
