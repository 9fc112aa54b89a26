#include "dataset.hpp"

#include <cmath>
#include <string>

#include "error.hpp"

namespace statecal {

Eigen::VectorXd FieldDataset::standardize_values(const Eigen::VectorXd& y) const {
  return ((y.array() - y_mean) / y_sd).matrix();
}

Eigen::VectorXd FieldDataset::unstandardize_values(const Eigen::VectorXd& y) const {
  return (y_mean + y_sd * y.array()).matrix();
}

Eigen::MatrixXd FieldDataset::scale_inputs(const Eigen::MatrixXd& x) const {
  require(x.cols() == static_cast<Eigen::Index>(x_bounds.size()),
          ErrorCode::invalid_argument, "scale_inputs: dimension mismatch");
  Eigen::MatrixXd out(x.rows(), x.cols());
  for (Eigen::Index k = 0; k < x.cols(); ++k)
    out.col(k) = (x.col(k).array() - x_bounds[k].lo) /
                 (x_bounds[k].hi - x_bounds[k].lo);
  return out;
}

Eigen::MatrixXd FieldDataset::unscale_inputs(const Eigen::MatrixXd& x_s) const {
  require(x_s.cols() == static_cast<Eigen::Index>(x_bounds.size()),
          ErrorCode::invalid_argument, "unscale_inputs: dimension mismatch");
  Eigen::MatrixXd out(x_s.rows(), x_s.cols());
  for (Eigen::Index k = 0; k < x_s.cols(); ++k)
    out.col(k) =
        (x_bounds[k].lo + (x_bounds[k].hi - x_bounds[k].lo) * x_s.col(k).array())
            .matrix();
  return out;
}

FieldDataset standardize(const RawDataset& raw, std::vector<Bounds> x_bounds) {
  const auto n = raw.y.size();
  require(n >= 2, ErrorCode::invalid_argument,
          "need at least 2 observations, got " + std::to_string(n));
  require(raw.x.rows() == n, ErrorCode::invalid_argument,
          "control-input rows do not match response length");

  if (x_bounds.empty()) {
    x_bounds.resize(raw.x.cols());
    for (Eigen::Index k = 0; k < raw.x.cols(); ++k)
      x_bounds[static_cast<size_t>(k)] = {raw.x.col(k).minCoeff(),
                                          raw.x.col(k).maxCoeff()};
  }
  require(static_cast<Eigen::Index>(x_bounds.size()) == raw.x.cols(),
          ErrorCode::invalid_argument,
          "control-input bounds do not match input dimension");

  FieldDataset out;
  out.x_raw = raw.x;
  out.y_raw = raw.y;
  out.x_bounds = x_bounds;

  out.x_scaled.resize(raw.x.rows(), raw.x.cols());
  for (Eigen::Index k = 0; k < raw.x.cols(); ++k) {
    const auto& b = x_bounds[static_cast<size_t>(k)];
    require(b.hi > b.lo, ErrorCode::invalid_argument,
            "degenerate bounds for control input " + std::to_string(k));
    for (Eigen::Index i = 0; i < raw.x.rows(); ++i) {
      const double s = (raw.x(i, k) - b.lo) / (b.hi - b.lo);
      require(s >= 0.0 && s <= 1.0, ErrorCode::invalid_argument,
              "control input " + std::to_string(raw.x(i, k)) +
                  " falls outside its bounds");
      out.x_scaled(i, k) = s;
    }
  }

  out.y_mean = raw.y.mean();
  const double ss = (raw.y.array() - out.y_mean).square().sum();
  out.y_sd = std::sqrt(ss / static_cast<double>(n - 1));
  require(out.y_sd > 0.0, ErrorCode::invalid_argument,
          "responses are constant; cannot standardize");
  out.y_std = out.standardize_values(raw.y);
  return out;
}

}  // namespace statecal
