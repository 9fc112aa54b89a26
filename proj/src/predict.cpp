#include "predict.hpp"

#include <algorithm>
#include <cmath>

#include "error.hpp"
#include "gp.hpp"
#include "linkfun.hpp"
#include "model.hpp"
#include "traceview.hpp"

namespace statecal::predict {

double empirical_quantile(std::vector<double> values, double q) {
  require(!values.empty(), ErrorCode::invalid_argument,
          "quantile of an empty sample");
  require(q >= 0.0 && q <= 1.0, ErrorCode::invalid_argument,
          "quantile level outside [0,1]");
  std::sort(values.begin(), values.end());
  const double h = q * static_cast<double>(values.size() - 1);
  const auto i = static_cast<size_t>(h);
  if (i + 1 >= values.size()) return values.back();
  const double frac = h - static_cast<double>(i);
  return values[i] + frac * (values[i + 1] - values[i]);
}

namespace {

void check_unit_box(const Eigen::MatrixXd& x_scaled) {
  require((x_scaled.array() >= 0.0).all() && (x_scaled.array() <= 1.0).all(),
          ErrorCode::invalid_argument,
          "prediction points must lie inside the scaled unit box");
}

// Scaled-axis theta1 values at the target points for one posterior draw.
// The gp variant conditions the link-scale process on the design-point path
// and samples; closed-form variants evaluate directly.  Values are clipped
// to [0,1], which only binds for identity-link conditional draws (and
// parametric extrapolation past the design), keeping simulator inputs
// inside the declared parameter box.
Eigen::VectorXd theta1_unit_at(const DrawView& d, const ModelSpec& spec,
                               const FieldDataset& data,
                               const Eigen::MatrixXd& x_new, Rng& rng) {
  const auto m = x_new.rows();
  Eigen::VectorXd unit(m);
  switch (spec.variant) {
    case Variant::gp: {
      const auto cond =
          gp::conditional(d.z, data.x_scaled, x_new,
                          {model::rho_from_nu(d.nu), d.lambda_theta, spec.mu()});
      const Eigen::MatrixXd root = gp::psd_sample_root(cond.cov);
      Eigen::VectorXd eps(m);
      for (Eigen::Index j = 0; j < m; ++j) eps(j) = rng.normal();
      const Eigen::VectorXd z_star = cond.mean + root * eps;
      for (Eigen::Index j = 0; j < m; ++j)
        unit(j) = spec.link == LinkKind::identity
                      ? z_star(j)
                      : linkfun::invert(spec.link, z_star(j));
      break;
    }
    case Variant::parametric_sqrt:
      unit = (d.beta0 + d.beta1 * x_new.col(0).array().sqrt()).matrix();
      break;
    case Variant::constant:
      unit.setConstant(model::theta2_from_xi(d.w));
      break;
  }
  return unit.array().min(1.0).max(0.0).matrix();
}

}  // namespace

PredictionResult run(const sampler::TraceSet& trace,
                     const Eigen::MatrixXd& x_new_scaled, const ModelSpec& spec,
                     const FieldDataset& data, Simulator& sim, Rng& rng) {
  check_unit_box(x_new_scaled);
  const TraceView view(trace, spec, data.n());
  require(view.n_draws() >= 1, ErrorCode::invalid_argument,
          "prediction needs a non-empty trace");

  PredictionResult out;
  out.x_new_scaled = x_new_scaled;
  out.x_new_raw = data.unscale_inputs(x_new_scaled);
  const auto m = x_new_scaled.rows();
  const int n_draws = view.n_draws();
  out.draws.resize(n_draws, m);
  out.theta1_paths.resize(n_draws, m);

  const int p = spec.n_params();
  Eigen::MatrixXd t(m, p);
  for (int k = 0; k < n_draws; ++k) {
    const DrawView d = view.draw(k);
    const Eigen::VectorXd unit = theta1_unit_at(d, spec, data, x_new_scaled, rng);
    for (Eigen::Index j = 0; j < m; ++j)
      out.theta1_paths(k, j) = spec.theta1().unscale(unit(j));
    t.col(0) = out.theta1_paths.row(k).transpose();
    if (p > 1) t.col(1).setConstant(spec.theta2().unscale(*d.theta2_unit()));

    const Eigen::VectorXd eta_std =
        data.standardize_values(sim.eval_batch(out.x_new_raw, t));
    const double noise_sd = 1.0 / std::sqrt(d.lambda_y);
    for (Eigen::Index j = 0; j < m; ++j)
      out.draws(k, j) =
          data.unstandardize(eta_std(j) + noise_sd * rng.normal());
  }

  out.mean = out.draws.colwise().mean().transpose();
  out.lower95.resize(m);
  out.upper95.resize(m);
  for (Eigen::Index j = 0; j < m; ++j) {
    std::vector<double> col(out.draws.col(j).data(),
                            out.draws.col(j).data() + n_draws);
    out.lower95(j) = empirical_quantile(col, 0.025);
    out.upper95(j) = empirical_quantile(std::move(col), 0.975);
  }
  return out;
}

Eigen::MatrixXd extract_theta1_posterior(const sampler::TraceSet& trace,
                                         const Eigen::MatrixXd& x_grid_scaled,
                                         const ModelSpec& spec,
                                         const FieldDataset& data, Rng& rng) {
  check_unit_box(x_grid_scaled);
  const TraceView view(trace, spec, data.n());
  require(view.n_draws() >= 1, ErrorCode::invalid_argument,
          "path extraction needs a non-empty trace");
  const auto m = x_grid_scaled.rows();
  Eigen::MatrixXd paths(view.n_draws(), m);
  for (int k = 0; k < view.n_draws(); ++k) {
    const DrawView d = view.draw(k);
    const Eigen::VectorXd unit =
        theta1_unit_at(d, spec, data, x_grid_scaled, rng);
    for (Eigen::Index j = 0; j < m; ++j)
      paths(k, j) = spec.theta1().unscale(unit(j));
  }
  return paths;
}

}  // namespace statecal::predict
