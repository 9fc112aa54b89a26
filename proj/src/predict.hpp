#pragma once

#include <Eigen/Dense>
#include <vector>

#include "dataset.hpp"
#include "modelspec.hpp"
#include "rng.hpp"
#include "sampler.hpp"
#include "simulator.hpp"

namespace statecal::predict {

struct PredictionResult {
  Eigen::MatrixXd x_new_raw;     // m x d
  Eigen::MatrixXd x_new_scaled;  // m x d
  Eigen::MatrixXd draws;         // n_draws x m, original response scale
  Eigen::MatrixXd theta1_paths;  // n_draws x m, raw parameter scale
  Eigen::VectorXd mean;          // m
  Eigen::VectorXd lower95;       // 2.5% empirical quantile
  Eigen::VectorXd upper95;       // 97.5% empirical quantile
};

// Type-7 (linear-interpolation) empirical quantile of the values.
double empirical_quantile(std::vector<double> values, double q);

// Posterior predictive of future observations at x_new (scaled frame):
// per posterior draw, the functional parameter is carried to x_new (GP
// conditioning for the gp variant, closed form otherwise), the simulator is
// evaluated there, and observation noise with variance 1/lambda_y is added
// on the standardized scale.  Intervals are therefore prediction intervals.
PredictionResult run(const sampler::TraceSet& trace,
                     const Eigen::MatrixXd& x_new_scaled, const ModelSpec& spec,
                     const FieldDataset& data, Simulator& sim, Rng& rng);

// Raw-scale functional-parameter paths on a grid (scaled frame), one row
// per posterior draw.
Eigen::MatrixXd extract_theta1_posterior(const sampler::TraceSet& trace,
                                         const Eigen::MatrixXd& x_grid_scaled,
                                         const ModelSpec& spec,
                                         const FieldDataset& data, Rng& rng);

}  // namespace statecal::predict
