#include "diagnostics.hpp"

#include <cmath>

#include "error.hpp"
#include "linkfun.hpp"
#include "model.hpp"
#include "traceview.hpp"

namespace statecal::diagnostics {

TestStatistics test_statistics(const Eigen::VectorXd& y,
                               const Eigen::VectorXd& x) {
  const auto n = y.size();
  require(n >= 2, ErrorCode::invalid_argument,
          "test statistics need at least 2 observations");
  require(x.size() == n, ErrorCode::invalid_argument,
          "test statistics: x and y lengths differ");
  TestStatistics t;
  t.t1 = y.mean();
  t.t2 = (y.array() - t.t1).square().sum() / static_cast<double>(n - 1);
  t.t3 = x.dot(y);
  return t;
}

double rmspe(const Eigen::VectorXd& predicted, const Eigen::VectorXd& actual) {
  require(predicted.size() == actual.size() && predicted.size() >= 1,
          ErrorCode::invalid_argument,
          "rmspe needs equal-length non-empty inputs");
  return std::sqrt((predicted - actual).squaredNorm() /
                   static_cast<double>(predicted.size()));
}

namespace {

// Scaled-axis theta1 path at the observed design for one posterior draw.
Eigen::VectorXd design_unit_path(const DrawView& d, const ModelSpec& spec,
                                 const FieldDataset& data) {
  switch (spec.variant) {
    case Variant::gp: {
      Eigen::VectorXd unit(d.z.size());
      for (Eigen::Index i = 0; i < d.z.size(); ++i)
        unit(i) = linkfun::invert(spec.link, d.z(i));
      return unit;
    }
    case Variant::parametric_sqrt:
      return (d.beta0 + d.beta1 * data.x_scaled.col(0).array().sqrt())
          .matrix();
    case Variant::constant:
      return Eigen::VectorXd::Constant(data.n(), model::theta2_from_xi(d.w));
  }
  fail(ErrorCode::runtime, "unreachable variant");
}

}  // namespace

CheckReport bayes_pvalues(const sampler::TraceSet& trace, const ModelSpec& spec,
                          const FieldDataset& data, Simulator& sim, int n_rep,
                          Rng& rng) {
  require(n_rep >= 1, ErrorCode::invalid_argument,
          "bayes_pvalues needs n_rep >= 1");
  const TraceView view(trace, spec, data.n());
  require(view.n_draws() >= 1, ErrorCode::invalid_argument,
          "bayes_pvalues needs a non-empty trace");

  CheckReport report;
  report.n_rep = n_rep;
  const Eigen::VectorXd x_col = data.x_raw.col(0);
  report.observed = test_statistics(data.y_raw, x_col);
  report.replicates.resize(n_rep, 3);

  const int n = data.n();
  int ge1 = 0, ge2 = 0, ge3 = 0;
  for (int r = 0; r < n_rep; ++r) {
    const int k = std::min(
        static_cast<int>(rng.uniform() * view.n_draws()), view.n_draws() - 1);
    const DrawView d = view.draw(k);
    const Eigen::VectorXd unit = design_unit_path(d, spec, data);
    Eigen::VectorXd theta1_raw(n);
    for (int i = 0; i < n; ++i)
      theta1_raw(i) = spec.theta1().unscale(unit(i));
    std::optional<double> theta2_raw;
    if (const auto u2 = d.theta2_unit())
      theta2_raw = spec.theta2().unscale(*u2);
    const Eigen::VectorXd eta_std = model::simulate_batch(
        sim, data, data.x_scaled, theta1_raw, theta2_raw);

    const double noise_sd = 1.0 / std::sqrt(d.lambda_y);
    Eigen::VectorXd y_rep(n);
    for (int i = 0; i < n; ++i)
      y_rep(i) = data.unstandardize(eta_std(i) + noise_sd * rng.normal());

    const TestStatistics t = test_statistics(y_rep, x_col);
    report.replicates(r, 0) = t.t1;
    report.replicates(r, 1) = t.t2;
    report.replicates(r, 2) = t.t3;
    ge1 += t.t1 >= report.observed.t1;
    ge2 += t.t2 >= report.observed.t2;
    ge3 += t.t3 >= report.observed.t3;
  }
  report.p1 = static_cast<double>(ge1) / n_rep;
  report.p2 = static_cast<double>(ge2) / n_rep;
  report.p3 = static_cast<double>(ge3) / n_rep;
  return report;
}

}  // namespace statecal::diagnostics
