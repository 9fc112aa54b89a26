#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "dataset.hpp"
#include "diagnostics.hpp"
#include "error.hpp"
#include "experiments.hpp"
#include "model.hpp"
#include "modelspec.hpp"
#include "rng.hpp"
#include "sampler.hpp"
#include "simulator.hpp"

using namespace statecal;
namespace diagnostics = statecal::diagnostics;

namespace {

ModelSpec parametric_spec() {
  ModelSpec spec;
  spec.variant = Variant::parametric_sqrt;
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

sampler::TraceSet plugin_trace(double beta0, double beta1, double xi,
                               double lambda_y, int rows) {
  sampler::TraceSet set;
  set.columns = {"iteration", "beta0", "beta1", "xi", "lambda_y", "log_post"};
  sampler::ChainTrace chain;
  chain.columns = set.columns;
  chain.draws.resize(rows, 6);
  for (int i = 0; i < rows; ++i) {
    chain.draws(i, 0) = i + 1;
    chain.draws(i, 1) = beta0;
    chain.draws(i, 2) = beta1;
    chain.draws(i, 3) = xi;
    chain.draws(i, 4) = lambda_y;
    chain.draws(i, 5) = 0.0;
  }
  set.chains.push_back(std::move(chain));
  return set;
}

}  // namespace

TEST_CASE("test_statistics computes mean, variance and cross moment") {
  Eigen::VectorXd y(3), x(3);
  y << 1.0, 2.0, 3.0;
  x << 0.1, 0.2, 0.3;
  const auto t = diagnostics::test_statistics(y, x);
  CHECK(t.t1 == doctest::Approx(2.0));
  CHECK(t.t2 == doctest::Approx(1.0));
  CHECK(t.t3 == doctest::Approx(1.4));

  // Stress-temperature example table.
  Eigen::VectorXd stress(6), temp(6);
  stress << 226.2, 91.4, 50.0, 30.6, 14.9, 7.0;
  temp << 200.0, 300.0, 350.0, 400.0, 500.0, 550.0;
  const auto ts = diagnostics::test_statistics(stress, temp);
  CHECK(ts.t1 == doctest::Approx(420.1 / 6.0).epsilon(1e-12));
  // Variance via the uncentered-sums identity, an independent route.
  const double sum_sq = 226.2 * 226.2 + 91.4 * 91.4 + 50.0 * 50.0 +
                        30.6 * 30.6 + 14.9 * 14.9 + 7.0 * 7.0;
  const double mean = 420.1 / 6.0;
  CHECK(ts.t2 == doctest::Approx((sum_sq - 6.0 * mean * mean) / 5.0).epsilon(1e-10));
  CHECK(ts.t3 == doctest::Approx(113700.0).epsilon(1e-12));

  CHECK_THROWS_AS((void)diagnostics::test_statistics(
                      Eigen::VectorXd::Constant(1, 1.0),
                      Eigen::VectorXd::Constant(1, 1.0)),
                  Error);
  CHECK_THROWS_AS((void)diagnostics::test_statistics(y, Eigen::VectorXd(2)),
                  Error);
}

TEST_CASE("rmspe is the root of the mean squared gap") {
  Eigen::VectorXd a(2), b(2);
  a << 1.0, 2.0;
  b << 1.0, 2.0;
  CHECK(diagnostics::rmspe(a, b) == 0.0);
  b << 2.0, 2.0;
  CHECK(diagnostics::rmspe(a, b) == doctest::Approx(std::sqrt(0.5)));
  CHECK(diagnostics::rmspe(b, a) == doctest::Approx(std::sqrt(0.5)));  // symmetric

  Eigen::VectorXd p(3), q(3);
  p << 3.0, -1.0, 0.5;
  q << 1.0, 1.0, 0.5;
  CHECK(diagnostics::rmspe(p, q) ==
        doctest::Approx(std::sqrt((4.0 + 4.0 + 0.0) / 3.0)));
  // Pairs can be listed in any order.
  Eigen::VectorXd pr(3), qr(3);
  pr << 0.5, 3.0, -1.0;
  qr << 0.5, 1.0, 1.0;
  CHECK(diagnostics::rmspe(pr, qr) == doctest::Approx(diagnostics::rmspe(p, q)));

  CHECK(diagnostics::rmspe(Eigen::VectorXd::Constant(1, 2.0),
                           Eigen::VectorXd::Constant(1, -1.0)) ==
        doctest::Approx(3.0));
  CHECK_THROWS_AS((void)diagnostics::rmspe(p, Eigen::VectorXd(2)), Error);
  CHECK_THROWS_AS((void)diagnostics::rmspe(Eigen::VectorXd(0), Eigen::VectorXd(0)),
                  Error);
}

TEST_CASE("posterior-predictive p-values are centered for the right model") {
  RawDataset all = experiments::generate_sim_data(551);
  RawDataset train, test;
  experiments::holdout_split(all, train, test);
  const FieldDataset data = standardize(train, {Bounds{0.0, 1.0}});
  const ModelSpec spec = parametric_spec();
  auto sim = make_builtin_simulator("quadratic");

  // Draws pinned at the data-generating parameters and noise level.
  const double lambda_std = (data.y_sd / 0.05) * (data.y_sd / 0.05);
  const sampler::TraceSet trace =
      plugin_trace(1.0 / 6.0, 2.0 / 3.0,
                   model::xi_from_theta2(spec.theta2().scale(2.5)), lambda_std,
                   200);

  Rng rng(31);
  const auto report =
      diagnostics::bayes_pvalues(trace, spec, data, *sim, 2000, rng);
  REQUIRE(report.replicates.rows() == 2000);
  REQUIRE(report.replicates.cols() == 3);
  CHECK(report.n_rep == 2000);
  CHECK(report.observed.t1 == doctest::Approx(data.y_raw.mean()));
  for (const double p : {report.p1, report.p2, report.p3}) {
    CHECK(p >= 0.01);
    CHECK(p <= 0.99);
  }
  // Replicate spread matches the observation noise: sd of a replicate mean
  // is 0.05 / sqrt(15), around which T1 varies.
  const double t1_sd = std::sqrt(
      (report.replicates.col(0).array() - report.replicates.col(0).mean())
          .square()
          .sum() /
      1999.0);
  CHECK(t1_sd == doctest::Approx(0.05 / std::sqrt(15.0)).epsilon(0.15));

  // Same stream, same verdict.
  Rng rng2(31);
  const auto again =
      diagnostics::bayes_pvalues(trace, spec, data, *sim, 2000, rng2);
  CHECK(again.p1 == report.p1);
  CHECK(again.p2 == report.p2);
  CHECK(again.p3 == report.p3);
  CHECK(again.replicates == report.replicates);

  CHECK_THROWS_AS((void)diagnostics::bayes_pvalues(trace, spec, data, *sim, 0,
                                                   rng),
                  Error);
}

TEST_CASE("a shifted model drives the mean p-value to the tail") {
  RawDataset all = experiments::generate_sim_data(551);
  RawDataset train, test;
  experiments::holdout_split(all, train, test);
  const FieldDataset data = standardize(train, {Bounds{0.0, 1.0}});
  const ModelSpec spec = parametric_spec();
  auto sim = make_builtin_simulator("quadratic");
  const double lambda_std = (data.y_sd / 0.05) * (data.y_sd / 0.05);

  // Path pulled far below the truth: replicates underpredict, so almost no
  // replicate mean exceeds the observed one.
  const sampler::TraceSet low =
      plugin_trace(0.05, 0.3, model::xi_from_theta2(spec.theta2().scale(1.2)),
                   lambda_std, 100);
  Rng rng(77);
  const auto low_report =
      diagnostics::bayes_pvalues(low, spec, data, *sim, 500, rng);
  CHECK(low_report.p1 < 0.01);
  CHECK(low_report.p3 < 0.01);

  // Path pushed above the truth: the opposite tail.
  const sampler::TraceSet high =
      plugin_trace(0.25, 0.7, model::xi_from_theta2(spec.theta2().scale(2.9)),
                   lambda_std, 100);
  const auto high_report =
      diagnostics::bayes_pvalues(high, spec, data, *sim, 500, rng);
  CHECK(high_report.p1 > 0.99);
  CHECK(high_report.p3 > 0.99);
}
