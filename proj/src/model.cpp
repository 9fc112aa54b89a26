#include "model.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "error.hpp"

namespace statecal::model {

double theta2_from_xi(double xi) { return std::exp(-std::exp(xi)); }

double xi_from_theta2(double theta2) {
  require(theta2 > 0.0 && theta2 < 1.0, ErrorCode::invalid_argument,
          "theta2 must lie strictly inside (0,1)");
  return std::log(-std::log(theta2));
}

double rho_from_nu(double nu) {
  // exp(-exp(nu)) rounds onto the closed endpoints for |nu| large; the
  // correlation code needs the open interval, so land on the nearest
  // interior doubles instead.
  const double rho = std::exp(-std::exp(nu));
  return std::min(std::max(rho, std::numeric_limits<double>::min()),
                  std::nextafter(1.0, 0.0));
}
double nu_from_rho(double rho) { return xi_from_theta2(rho); }

Eigen::VectorXd simulate_batch(Simulator& sim, const FieldDataset& data,
                               const Eigen::MatrixXd& x_scaled,
                               const Eigen::VectorXd& theta1_raw,
                               std::optional<double> theta2_raw) {
  const auto n = x_scaled.rows();
  require(theta1_raw.size() == n, ErrorCode::invalid_argument,
          "simulate_batch: one theta1 value per design point required");
  const int p = theta2_raw ? 2 : 1;
  require(sim.n_params() == p, ErrorCode::invalid_argument,
          "simulator expects " + std::to_string(sim.n_params()) +
              " calibration parameters, model provides " + std::to_string(p));
  Eigen::MatrixXd t(n, p);
  t.col(0) = theta1_raw;
  if (theta2_raw) t.col(1).setConstant(*theta2_raw);
  const Eigen::VectorXd raw = sim.eval_batch(data.unscale_inputs(x_scaled), t);
  return data.standardize_values(raw);
}

namespace {

Eigen::VectorXd theta1_raw_from_z(const Eigen::VectorXd& z,
                                  const ModelSpec& spec) {
  Eigen::VectorXd raw(z.size());
  for (Eigen::Index i = 0; i < z.size(); ++i)
    raw(i) = spec.theta1().unscale(linkfun::invert(spec.link, z(i)));
  return raw;
}

std::optional<double> theta2_raw_from_unit(std::optional<double> theta2_unit,
                                           const ModelSpec& spec) {
  if (!theta2_unit) return std::nullopt;
  require(spec.has_theta2(), ErrorCode::invalid_argument,
          "theta2 supplied to a single-parameter model");
  return spec.theta2().unscale(*theta2_unit);
}

}  // namespace

double ssr(const Eigen::VectorXd& z, std::optional<double> theta2_unit,
           const FieldDataset& data, Simulator& sim, const ModelSpec& spec) {
  require(z.size() == data.n(), ErrorCode::invalid_argument,
          "theta1 path length does not match the training design");
  const Eigen::VectorXd eta = simulate_batch(
      sim, data, data.x_scaled, theta1_raw_from_z(z, spec),
      theta2_raw_from_unit(theta2_unit, spec));
  return (data.y_std - eta).squaredNorm();
}

double ssr_unit(const Eigen::VectorXd& theta1_unit,
                std::optional<double> theta2_unit, const FieldDataset& data,
                Simulator& sim, const ModelSpec& spec) {
  require(theta1_unit.size() == data.n(), ErrorCode::invalid_argument,
          "theta1 path length does not match the training design");
  Eigen::VectorXd raw(theta1_unit.size());
  for (Eigen::Index i = 0; i < theta1_unit.size(); ++i)
    raw(i) = spec.theta1().unscale(theta1_unit(i));
  const Eigen::VectorXd eta =
      simulate_batch(sim, data, data.x_scaled, raw,
                     theta2_raw_from_unit(theta2_unit, spec));
  return (data.y_std - eta).squaredNorm();
}

double log_likelihood(const Eigen::VectorXd& z,
                      std::optional<double> theta2_unit, double lambda_y,
                      const FieldDataset& data, Simulator& sim,
                      const ModelSpec& spec) {
  require(lambda_y > 0.0, ErrorCode::invalid_argument,
          "response precision must be positive");
  const double n = static_cast<double>(data.n());
  return 0.5 * n * std::log(lambda_y) -
         0.5 * lambda_y * ssr(z, theta2_unit, data, sim, spec);
}

double log_prior_theta1(const Eigen::VectorXd& z, const gp::CorrParams& params,
                        const gp::CorrFactors& factors) {
  return gp::log_mvn_prior(z, params, factors);
}

bool check_constraints(const std::vector<PathConstraint>& constraints,
                       const Eigen::VectorXd& raw_at_constraints) {
  require(raw_at_constraints.size() ==
              static_cast<Eigen::Index>(constraints.size()),
          ErrorCode::invalid_argument,
          "one evaluated value per constraint required");
  for (size_t c = 0; c < constraints.size(); ++c) {
    const double v = raw_at_constraints(static_cast<Eigen::Index>(c));
    if (!(v > constraints[c].lower && v < constraints[c].upper)) return false;
  }
  return true;
}

std::vector<int> constraint_design_rows(
    const std::vector<PathConstraint>& constraints,
    const Eigen::MatrixXd& x_scaled) {
  std::vector<int> rows;
  rows.reserve(constraints.size());
  for (const auto& c : constraints) {
    int hit = -1;
    for (Eigen::Index i = 0; i < x_scaled.rows(); ++i)
      if ((x_scaled.row(i).transpose() - c.x_scaled).norm() < 1e-9) {
        hit = static_cast<int>(i);
        break;
      }
    require(hit >= 0, ErrorCode::config,
            "constraint site is not one of the design points");
    rows.push_back(hit);
  }
  return rows;
}

double conditional_logdensity_xi(double xi, const Eigen::VectorXd& z,
                                 double lambda_y, const FieldDataset& data,
                                 Simulator& sim, const ModelSpec& spec) {
  const double s = ssr(z, theta2_from_xi(xi), data, sim, spec);
  return -0.5 * lambda_y * s + xi - std::exp(xi);
}

double log_prior_nu(double nu, double b_rho) {
  // log(1 - rho) = log(-expm1(-e^nu)), switching to its asymptote
  // log(1 - rho) ~ nu once e^nu underflows, so the density stays finite
  // and proper along the whole real line.
  const double t = std::exp(nu);
  const double log1m_rho = t > 0.0 ? std::log(-std::expm1(-t)) : nu;
  return nu - t + (b_rho - 1.0) * log1m_rho;
}

double conditional_logdensity_nu(double nu, const Eigen::VectorXd& z,
                                 double lambda_theta, double mu,
                                 const gp::CorrFactors& factors, double b_rho) {
  const Eigen::VectorXd centered = z.array() - mu;
  return factors.logdet_half_inv() -
         0.5 * lambda_theta * factors.quad_form(centered) +
         log_prior_nu(nu, b_rho);
}

double conditional_logdensity_nu(double nu, const Eigen::VectorXd& z,
                                 double lambda_theta, double mu,
                                 const Eigen::MatrixXd& x_scaled, double b_rho) {
  const gp::CorrFactors factors(x_scaled, rho_from_nu(nu));
  return conditional_logdensity_nu(nu, z, lambda_theta, mu, factors, b_rho);
}

double draw_lambda_y_from_ssr(double ssr_value, int n, const Hyperpriors& hyper,
                              Rng& rng) {
  return rng.gamma(hyper.a_y + 0.5 * n, hyper.b_y + 0.5 * ssr_value);
}

double draw_lambda_y(const Eigen::VectorXd& z, std::optional<double> theta2_unit,
                     const FieldDataset& data, Simulator& sim,
                     const ModelSpec& spec, Rng& rng) {
  return draw_lambda_y_from_ssr(ssr(z, theta2_unit, data, sim, spec), data.n(),
                                spec.hyper, rng);
}

double draw_lambda_theta_from_quad(double quad, int n, const Hyperpriors& hyper,
                                   Rng& rng) {
  return rng.gamma(hyper.a_lambda_theta + 0.5 * n,
                   hyper.b_lambda_theta + 0.5 * quad);
}

double draw_lambda_theta(const Eigen::VectorXd& z, double nu, double mu,
                         const Eigen::MatrixXd& x_scaled,
                         const Hyperpriors& hyper, Rng& rng) {
  const gp::CorrFactors factors(x_scaled, rho_from_nu(nu));
  const Eigen::VectorXd centered = z.array() - mu;
  return draw_lambda_theta_from_quad(factors.quad_form(centered),
                                     static_cast<int>(z.size()), hyper, rng);
}

double joint_log_posterior(const FullState& state, const FieldDataset& data,
                           Simulator& sim, const ModelSpec& spec,
                           const Eigen::MatrixXd& x_scaled) {
  const double n = static_cast<double>(data.n());
  const auto& h = spec.hyper;

  std::optional<double> theta2_unit;
  double jac_xi = 0.0;
  if (state.xi) {
    theta2_unit = theta2_from_xi(*state.xi);
    jac_xi = *state.xi - std::exp(*state.xi);
  }

  // Constraint indicator at the design sites.
  if (!spec.theta1().constraints.empty()) {
    const auto& cons = spec.theta1().constraints;
    const auto rows = constraint_design_rows(cons, x_scaled);
    Eigen::VectorXd raw(static_cast<Eigen::Index>(cons.size()));
    for (size_t c = 0; c < cons.size(); ++c)
      raw(static_cast<Eigen::Index>(c)) =
          spec.theta1().unscale(linkfun::invert(spec.link, state.z(rows[c])));
    if (!check_constraints(cons, raw))
      return -std::numeric_limits<double>::infinity();
  }

  const double s = ssr(state.z, theta2_unit, data, sim, spec);
  const gp::CorrFactors factors(x_scaled, rho_from_nu(state.nu));
  const Eigen::VectorXd centered = state.z.array() - spec.mu();
  const double quad = factors.quad_form(centered);

  return (h.a_y + 0.5 * n - 1.0) * std::log(state.lambda_y) -
         state.lambda_y * (h.b_y + 0.5 * s) +
         (h.a_lambda_theta + 0.5 * n - 1.0) * std::log(state.lambda_theta) -
         state.lambda_theta * (h.b_lambda_theta + 0.5 * quad) +
         factors.logdet_half_inv() + jac_xi + log_prior_nu(state.nu, h.b_rho);
}

}  // namespace statecal::model
