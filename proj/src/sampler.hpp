#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dataset.hpp"
#include "modelspec.hpp"
#include "rng.hpp"
#include "simulator.hpp"

namespace statecal::sampler {

struct ChainConfig {
  int n_burn = 5000;
  int n_post = 4000;
  int thin = 2;
  int n_chains = 3;
  int adapt_interval = 100;
  double target_scalar_lo = 0.40;  // scalar Metropolis blocks
  double target_scalar_hi = 0.50;
  double target_block_lo = 0.20;  // multivariate blocks
  double target_block_hi = 0.25;
  std::uint64_t seed = 0;

  int n_recorded() const { return thin > 0 ? n_post / thin : 0; }
  void validate() const;  // throws ErrorCode::config
};

// Current position of one chain.  Which fields are live depends on the
// variant: gp uses (z, xi, nu, lambda_theta, lambda_y); parametric_sqrt
// uses (beta0, beta1, xi, lambda_y) with the path on the scaled theta axis;
// constant uses (w = log(-log theta1_unit), xi, lambda_y).  xi is absent
// for single-parameter models.
struct ChainState {
  Eigen::VectorXd z;
  double beta0 = 0.0;
  double beta1 = 0.0;
  double w = 0.0;
  std::optional<double> xi;
  double nu = 0.0;
  double lambda_theta = 1.0;
  double lambda_y = 1.0;
};

// Acceptance bookkeeping for one Metropolis block of one chain.
struct BlockStats {
  std::string name;
  bool scalar_target = true;   // which target interval adapted it
  double scale = 1.0;          // proposal scale after burn-in (frozen)
  double accept_final_window = 0.0;  // rate over the last adapt window of burn-in
  double accept_burn_tail = 0.0;     // rate over the last min(1000, n_burn) burn iters
  double accept_post = 0.0;          // rate over post-burn-in iterations
};

struct ChainTrace {
  int chain_index = 0;
  std::vector<std::string> columns;  // iteration, blocks..., log_post
  Eigen::MatrixXd draws;             // n_recorded x columns
  std::vector<BlockStats> blocks;

  int n_recorded() const { return static_cast<int>(draws.rows()); }
  int column(const std::string& name) const;       // throws if missing
  Eigen::VectorXd series(const std::string& name) const;
};

struct TraceSet {
  std::vector<std::string> columns;
  std::vector<ChainTrace> chains;
  std::map<std::string, double> rhat;  // per column (except iteration)

  int n_chains() const { return static_cast<int>(chains.size()); }
  int n_combined() const;
  int column(const std::string& name) const;
  // Concatenation over chains in index order.
  Eigen::VectorXd combined(const std::string& name) const;
};

// --- Metropolis primitives (exposed for direct verification) ---

// candidate = z + c * S * eps, eps iid standard normal.
Eigen::VectorXd propose_theta1_block(const Eigen::VectorXd& z,
                                     const Eigen::MatrixXd& root, double c,
                                     Rng& rng);

// Accept with probability min(1, exp(log_new - log_old)); a -inf candidate
// never wins, and a -inf current state always loses to a finite candidate.
bool mh_accept(double log_target_new, double log_target_old, Rng& rng);

// One multiplicative adaptation step toward the target interval.
double adapt_scale(double scale, double rate, double target_lo,
                   double target_hi);

// Split-chain potential-scale-reduction factor.  Needs >= 2 chains with
// >= 10 draws each; identical constant chains report 1.0.
double rhat(const std::vector<Eigen::VectorXd>& chains);

// Starting state: hyperparameters from their priors; the theta1 path from
// the correlation structure at a moderated starting correlation with unit
// process variance, anchored inside any constraint windows (uniform draw in
// the window, remaining coordinates completed from the conditional law);
// rejection on identity-link bounds, capped at 10^5 tries.  Unit scale keeps
// the start off the link's saturated tails; burn-in owns the rest.
ChainState initialize_state(const ModelSpec& spec, const FieldDataset& data,
                            Rng& rng);

ChainTrace run_chain(const ModelSpec& spec, const FieldDataset& data,
                     Simulator& sim, const ChainConfig& config,
                     int chain_index);

// Runs config.n_chains chains (threaded when allowed) and merges them in
// chain order.  sim_for_chain supplies each chain's simulator session; pass
// the same object only if it is safe for concurrent use.
TraceSet run_chains(const ModelSpec& spec, const FieldDataset& data,
                    const std::function<Simulator&(int)>& sim_for_chain,
                    const ChainConfig& config, bool parallel = true);

}  // namespace statecal::sampler
