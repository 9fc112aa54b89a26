#include "gp.hpp"

#include <cmath>
#include <string>

#include "error.hpp"

namespace statecal::gp {

namespace {
constexpr double kEigenFloor = 1e-300;   // stand-in for a non-positive lam_1
constexpr double kNegEigenTol = -1e-12;  // conditioning noise we tolerate
}  // namespace

Eigen::MatrixXd corr(const Eigen::MatrixXd& x_scaled, double rho) {
  require(rho > 0.0 && rho < 1.0, ErrorCode::invalid_argument,
          "correlation parameter must lie in (0,1), got " + std::to_string(rho));
  const auto n = x_scaled.rows();
  const double log_rho = std::log(rho);
  Eigen::MatrixXd r(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    r(i, i) = 1.0;
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double d2 = (x_scaled.row(i) - x_scaled.row(j)).squaredNorm();
      r(i, j) = r(j, i) = std::exp(4.0 * d2 * log_rho);
    }
  }
  return r;
}

CorrMatrix corr_matrix(const Eigen::MatrixXd& x_scaled, double rho) {
  return CorrMatrix{corr(x_scaled, rho), 0.0};
}

CorrMatrix regularize(const CorrMatrix& r, double a) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(r.values,
                                                    Eigen::EigenvaluesOnly);
  require(es.info() == Eigen::Success, ErrorCode::runtime,
          "eigendecomposition failed while regularizing a correlation matrix");
  const double lam_min = std::max(es.eigenvalues().minCoeff(), kEigenFloor);
  const double lam_max = es.eigenvalues().maxCoeff();
  const double ea = std::exp(a);
  // lam_max (kappa - e^a) / (kappa (e^a - 1)) with kappa = lam_max / lam_min,
  // rearranged so the floored lam_min cannot overflow kappa to infinity.
  const double delta = std::max((lam_max - ea * lam_min) / (ea - 1.0), 0.0);
  return CorrMatrix{r.values, r.delta + delta};
}

double condition_number(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
  require(es.info() == Eigen::Success, ErrorCode::runtime,
          "eigendecomposition failed in condition_number");
  const double lam_min = std::max(es.eigenvalues().minCoeff(), kEigenFloor);
  return es.eigenvalues().maxCoeff() / lam_min;
}

double chol_logdet(const CorrMatrix& r) {
  Eigen::LLT<Eigen::MatrixXd> llt(r.effective());
  require(llt.info() == Eigen::Success, ErrorCode::runtime,
          "Cholesky failed on a regularized correlation matrix");
  return -llt.matrixLLT().diagonal().array().log().sum();
}

Eigen::MatrixXd spectral_root(const CorrMatrix& r) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(r.effective());
  require(es.info() == Eigen::Success, ErrorCode::runtime,
          "eigendecomposition failed in spectral_root");
  const Eigen::ArrayXd lam = es.eigenvalues().array().max(0.0);
  return es.eigenvectors() * lam.sqrt().matrix().asDiagonal();
}

Eigen::MatrixXd psd_sample_root(const Eigen::MatrixXd& cov) {
  require(cov.allFinite(), ErrorCode::runtime,
          "covariance has non-finite entries in psd_sample_root");
  const Eigen::MatrixXd sym = 0.5 * (cov + cov.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym);
  require(es.info() == Eigen::Success, ErrorCode::runtime,
          "eigendecomposition failed in psd_sample_root");
  // Nearest-PSD projection: conditional covariances are PSD in exact
  // arithmetic, but near-degenerate conditioning (rho -> 1) cancels
  // catastrophically, so negative eigenvalues of any size are roundoff.
  const Eigen::ArrayXd lam = es.eigenvalues().array().max(0.0);
  return es.eigenvectors() * lam.sqrt().matrix().asDiagonal();
}

Conditional conditional(const Eigen::VectorXd& z_obs,
                        const Eigen::MatrixXd& x_obs,
                        const Eigen::MatrixXd& x_new, const CorrParams& params) {
  require(x_obs.cols() == x_new.cols(), ErrorCode::invalid_argument,
          "conditional: design dimension mismatch");
  require(z_obs.size() == x_obs.rows(), ErrorCode::invalid_argument,
          "conditional: observed values do not match observed design");
  require(params.lambda > 0.0, ErrorCode::invalid_argument,
          "conditional: process precision must be positive");
  const CorrMatrix r_obs = regularize(corr_matrix(x_obs, params.rho));
  Eigen::LLT<Eigen::MatrixXd> llt(r_obs.effective());
  require(llt.info() == Eigen::Success, ErrorCode::runtime,
          "Cholesky failed in conditional");

  const auto n = x_obs.rows();
  const auto m = x_new.rows();
  const double log_rho = std::log(params.rho);
  Eigen::MatrixXd cross(n, m);  // R(x_obs, x_new), no ridge
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < m; ++j) {
      const double d2 = (x_obs.row(i) - x_new.row(j)).squaredNorm();
      cross(i, j) = std::exp(4.0 * d2 * log_rho);
    }
  const Eigen::MatrixXd r_new = corr(x_new, params.rho);

  const Eigen::VectorXd resid = z_obs.array() - params.mu;
  const Eigen::VectorXd alpha = llt.solve(resid);
  const Eigen::MatrixXd w = llt.solve(cross);  // R_obs^{-1} R_cross

  Conditional out;
  out.mean = (params.mu + (cross.transpose() * alpha).array()).matrix();
  Eigen::MatrixXd cov = (r_new - cross.transpose() * w) / params.lambda;
  out.cov = 0.5 * (cov + cov.transpose());
  return out;
}

CorrFactors::CorrFactors(const Eigen::MatrixXd& x_scaled, double rho)
    : rho_(rho), r_(regularize(corr_matrix(x_scaled, rho))) {
  llt_.compute(r_.effective());
  require(llt_.info() == Eigen::Success, ErrorCode::runtime,
          "Cholesky failed on a regularized correlation matrix");
  logdet_half_inv_ = -llt_.matrixLLT().diagonal().array().log().sum();
}

const Eigen::MatrixXd& CorrFactors::sample_root() const {
  if (root_.size() == 0) root_ = spectral_root(r_);
  return root_;
}

double CorrFactors::quad_form(const Eigen::VectorXd& v) const {
  return v.dot(llt_.solve(v));
}

Eigen::VectorXd CorrFactors::solve(const Eigen::VectorXd& v) const {
  return llt_.solve(v);
}

double log_mvn_prior(const Eigen::VectorXd& z, const CorrParams& params,
                     const CorrFactors& factors) {
  const auto n = static_cast<double>(z.size());
  const Eigen::VectorXd centered = z.array() - params.mu;
  return 0.5 * n * std::log(params.lambda) + factors.logdet_half_inv() -
         0.5 * params.lambda * factors.quad_form(centered);
}

}  // namespace statecal::gp
