#pragma once

#include <Eigen/Dense>
#include <vector>

namespace statecal {

struct Bounds {
  double lo = 0.0;
  double hi = 1.0;
};

// Field observations as provided: control inputs by row, one response each.
struct RawDataset {
  Eigen::MatrixXd x;  // N x d_x, raw units
  Eigen::VectorXd y;  // N, raw units
};

// Training data in the internal frame: control inputs mapped to [0,1]^d and
// responses standardized to mean 0, sd 1.  The raw copies and the transform
// constants ride along so results can be reported in original units.
struct FieldDataset {
  Eigen::MatrixXd x_raw;
  Eigen::MatrixXd x_scaled;
  Eigen::VectorXd y_raw;
  Eigen::VectorXd y_std;
  std::vector<Bounds> x_bounds;
  double y_mean = 0.0;
  double y_sd = 1.0;

  int n() const { return static_cast<int>(y_raw.size()); }
  int dim_x() const { return static_cast<int>(x_raw.cols()); }

  double standardize_value(double y) const { return (y - y_mean) / y_sd; }
  double unstandardize(double y) const { return y_mean + y_sd * y; }
  Eigen::VectorXd standardize_values(const Eigen::VectorXd& y) const;
  Eigen::VectorXd unstandardize_values(const Eigen::VectorXd& y) const;

  Eigen::MatrixXd scale_inputs(const Eigen::MatrixXd& x) const;       // raw -> [0,1]
  Eigen::MatrixXd unscale_inputs(const Eigen::MatrixXd& x_s) const;   // [0,1] -> raw
};

// Build the internal frame.  Empty bounds means per-column data min/max.
// Throws when a bound is degenerate, fewer than 2 rows, sd(y) == 0, or a
// point falls outside its bounds.
FieldDataset standardize(const RawDataset& raw,
                         std::vector<Bounds> x_bounds = {});

}  // namespace statecal
