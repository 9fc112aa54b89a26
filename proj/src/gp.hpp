#pragma once

#include <Eigen/Dense>

namespace statecal::gp {

// Gaussian-process layer for the link-scale parameter path.  Correlation is
// R(x,x') = rho^{4 sum_k (x_k - x'_k)^2} on design points scaled to [0,1]^d,
// so rho in (0,1) is the correlation of points half the domain apart in one
// coordinate.

struct CorrParams {
  double rho;     // correlation hyperparameter, in (0,1)
  double lambda;  // process precision
  double mu;      // process mean on the link scale
};

struct CorrMatrix {
  Eigen::MatrixXd values;  // unit-diagonal correlation part, N x N
  double delta = 0.0;      // additive ridge from regularize()
  Eigen::MatrixXd effective() const {
    Eigen::MatrixXd out = values;
    out.diagonal().array() += delta;
    return out;
  }
};

Eigen::MatrixXd corr(const Eigen::MatrixXd& x_scaled, double rho);
CorrMatrix corr_matrix(const Eigen::MatrixXd& x_scaled, double rho);

// Lower an ill-conditioned correlation matrix onto condition number e^a by
// the smallest sufficient ridge: delta = lam_N (kappa - e^a) / (kappa (e^a - 1))
// clamped at zero, with kappa = lam_N / max(lam_1, 1e-300).
CorrMatrix regularize(const CorrMatrix& r, double a = 20.0);

double condition_number(const Eigen::MatrixXd& m);

// log |R + delta I|^{-1/2} via Cholesky: -sum_i log l_ii.
double chol_logdet(const CorrMatrix& r);

// S = U diag(sqrt(lam)) with S S^T = R + delta I (eigenvalues clamped at 0).
Eigen::MatrixXd spectral_root(const CorrMatrix& r);

// Square root for a general covariance that may carry negative eigenvalues
// from catastrophic cancellation in conditioning: symmetrize, then project
// onto the PSD cone by clamping the spectrum at zero.
Eigen::MatrixXd psd_sample_root(const Eigen::MatrixXd& cov);

struct Conditional {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
};

// Conditional law of the process at x_new given values z_obs at x_obs.  The
// observed block is regularized; cross and new blocks are not.
Conditional conditional(const Eigen::VectorXd& z_obs,
                        const Eigen::MatrixXd& x_obs,
                        const Eigen::MatrixXd& x_new, const CorrParams& params);

// Per-chain cache of the factorizations of R(rho) for one design: reused by
// every density evaluation until rho moves.
class CorrFactors {
 public:
  CorrFactors() = default;
  CorrFactors(const Eigen::MatrixXd& x_scaled, double rho);

  double rho() const { return rho_; }
  const CorrMatrix& R() const { return r_; }
  double logdet_half_inv() const { return logdet_half_inv_; }
  // Computed on first use (rejected proposals never need it).  Lazy state
  // makes the object single-chain only, which matches its cache role.
  const Eigen::MatrixXd& sample_root() const;
  // v^T (R + delta I)^{-1} v
  double quad_form(const Eigen::VectorXd& v) const;
  Eigen::VectorXd solve(const Eigen::VectorXd& v) const;
  int n() const { return static_cast<int>(r_.values.rows()); }

 private:
  double rho_ = 0.0;
  CorrMatrix r_;
  Eigen::LLT<Eigen::MatrixXd> llt_;
  double logdet_half_inv_ = 0.0;
  mutable Eigen::MatrixXd root_;
};

// N(mu 1, lambda^{-1} (R + delta I)) log density of z, dropping the 2*pi
// normalization that cancels in every acceptance ratio and Gibbs weight.
double log_mvn_prior(const Eigen::VectorXd& z, const CorrParams& params,
                     const CorrFactors& factors);

}  // namespace statecal::gp
