#pragma once

#include <Eigen/Dense>
#include <optional>

#include "dataset.hpp"
#include "modelspec.hpp"
#include "rng.hpp"
#include "sampler.hpp"
#include "simulator.hpp"

namespace statecal::diagnostics {

struct TestStatistics {
  double t1 = 0.0;  // sample mean
  double t2 = 0.0;  // sample variance (n-1 denominator)
  double t3 = 0.0;  // sum of x_i * y_i (first control-input column)
};

TestStatistics test_statistics(const Eigen::VectorXd& y,
                               const Eigen::VectorXd& x);

// Root mean squared prediction error on whatever scale the inputs share;
// callers pass original-scale values.
double rmspe(const Eigen::VectorXd& predicted, const Eigen::VectorXd& actual);

struct CheckReport {
  TestStatistics observed;
  Eigen::MatrixXd replicates;  // n_rep x 3 (T1, T2, T3 per replicate)
  double p1 = 0.0, p2 = 0.0, p3 = 0.0;
  std::optional<double> rmspe_value;  // filled by callers with holdout data
  int n_rep = 2000;
};

// Posterior-predictive check at the observed design: n_rep replicate
// datasets, one posterior draw each (drawn uniformly with replacement),
// compared on the raw scale; p_i = fraction of replicates with
// T_i(y*) >= T_i(y) (ties count).
CheckReport bayes_pvalues(const sampler::TraceSet& trace, const ModelSpec& spec,
                          const FieldDataset& data, Simulator& sim, int n_rep,
                          Rng& rng);

}  // namespace statecal::diagnostics
