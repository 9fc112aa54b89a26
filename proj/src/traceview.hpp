#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "modelspec.hpp"
#include "sampler.hpp"

namespace statecal {

// One recorded posterior draw, decoded from trace columns.
struct DrawView {
  Eigen::VectorXd z;  // gp variant: link-scale path at the design points
  double beta0 = 0.0;
  double beta1 = 0.0;
  double w = 0.0;
  std::optional<double> xi;
  double nu = 0.0;
  double lambda_theta = 1.0;
  double lambda_y = 1.0;

  std::optional<double> theta2_unit() const;
};

// Flat, chain-ordered view over a TraceSet's recorded states.
class TraceView {
 public:
  TraceView(const sampler::TraceSet& trace, const ModelSpec& spec,
            int n_design);

  int n_draws() const { return n_draws_; }
  DrawView draw(int k) const;

 private:
  const sampler::TraceSet& trace_;
  const ModelSpec& spec_;
  int n_design_;
  int n_draws_;
  std::vector<int> z_cols_;
  int beta0_col_ = -1, beta1_col_ = -1, w_col_ = -1;
  int xi_col_ = -1, nu_col_ = -1, lambda_theta_col_ = -1, lambda_y_col_ = -1;
};

}  // namespace statecal
