#pragma once

#include <Eigen/Dense>
#include <optional>

#include "dataset.hpp"
#include "gp.hpp"
#include "modelspec.hpp"
#include "rng.hpp"
#include "simulator.hpp"

namespace statecal::model {

// theta2 = exp(-e^xi): bijection from the real line to (0,1) used for the
// state-independent parameter; +xi - e^xi is its uniform-prior Jacobian.
double theta2_from_xi(double xi);
double xi_from_theta2(double theta2);

// rho = exp(-e^nu), same transform for the correlation hyperparameter.
double rho_from_nu(double nu);
double nu_from_rho(double rho);

// Evaluate the simulator at scaled design points with raw parameter values
// and standardize the responses with the dataset's constants.  theta1_raw
// has one entry per row of x_scaled; theta2_raw rides along when present.
Eigen::VectorXd simulate_batch(Simulator& sim, const FieldDataset& data,
                               const Eigen::MatrixXd& x_scaled,
                               const Eigen::VectorXd& theta1_raw,
                               std::optional<double> theta2_raw);

// Sum of squared residuals of y_std against the standardized simulator
// output at the state's raw parameters; z is the link-scale theta1 path.
double ssr(const Eigen::VectorXd& z, std::optional<double> theta2_unit,
           const FieldDataset& data, Simulator& sim, const ModelSpec& spec);

// Same, with the theta1 path already on its scaled (0,1) axis (parametric
// and constant variants hold their state there).
double ssr_unit(const Eigen::VectorXd& theta1_unit,
                std::optional<double> theta2_unit, const FieldDataset& data,
                Simulator& sim, const ModelSpec& spec);

// (N/2) log lambda_y - (lambda_y/2) SSR, additive constants dropped.
double log_likelihood(const Eigen::VectorXd& z,
                      std::optional<double> theta2_unit, double lambda_y,
                      const FieldDataset& data, Simulator& sim,
                      const ModelSpec& spec);

// MVN process prior of the link-scale path (see gp::log_mvn_prior).
double log_prior_theta1(const Eigen::VectorXd& z, const gp::CorrParams& params,
                        const gp::CorrFactors& factors);

// True iff every raw value lies strictly inside its constraint interval.
// raw_at_constraints[i] is theta1 at constraints[i]'s site.
bool check_constraints(const std::vector<PathConstraint>& constraints,
                       const Eigen::VectorXd& raw_at_constraints);

// Design-row index of each constraint site (sites must be design points).
std::vector<int> constraint_design_rows(
    const std::vector<PathConstraint>& constraints,
    const Eigen::MatrixXd& x_scaled);

// Full conditional of xi (up to a constant): -(lambda_y/2) SSR + xi - e^xi.
double conditional_logdensity_xi(double xi, const Eigen::VectorXd& z,
                                 double lambda_y, const FieldDataset& data,
                                 Simulator& sim, const ModelSpec& spec);

// Full conditional of nu: chol_logdet(R_nu) - (lambda_theta/2) q(z; R_nu)
// + nu - e^nu + (b_rho - 1) log(1 - exp(-e^nu)); R_nu rebuilt + regularized.
double conditional_logdensity_nu(double nu, const Eigen::VectorXd& z,
                                 double lambda_theta, double mu,
                                 const Eigen::MatrixXd& x_scaled, double b_rho);

// Same with precomputed factors for rho(nu) (sampler fast path).
double conditional_logdensity_nu(double nu, const Eigen::VectorXd& z,
                                 double lambda_theta, double mu,
                                 const gp::CorrFactors& factors, double b_rho);

// Prior-plus-Jacobian term of nu alone (reused by the joint posterior).
double log_prior_nu(double nu, double b_rho);

// Exact Gibbs draws.
double draw_lambda_y(const Eigen::VectorXd& z, std::optional<double> theta2_unit,
                     const FieldDataset& data, Simulator& sim,
                     const ModelSpec& spec, Rng& rng);
double draw_lambda_y_from_ssr(double ssr_value, int n, const Hyperpriors& hyper,
                              Rng& rng);
double draw_lambda_theta(const Eigen::VectorXd& z, double nu, double mu,
                         const Eigen::MatrixXd& x_scaled,
                         const Hyperpriors& hyper, Rng& rng);
double draw_lambda_theta_from_quad(double quad, int n, const Hyperpriors& hyper,
                                   Rng& rng);

// Joint log posterior of the full state (additive constants dropped), used
// by the full-conditional consistency checks and reported per sweep.
struct FullState {
  Eigen::VectorXd z;            // link-scale theta1 path at the design
  std::optional<double> xi;     // absent when the model has no theta2
  double nu = 0.0;              // gp variant only
  double lambda_theta = 1.0;    // gp variant only
  double lambda_y = 1.0;
};

double joint_log_posterior(const FullState& state, const FieldDataset& data,
                           Simulator& sim, const ModelSpec& spec,
                           const Eigen::MatrixXd& x_scaled);

}  // namespace statecal::model
