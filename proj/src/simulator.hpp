#pragma once

#include <Eigen/Dense>
#include <memory>
#include <string>

namespace statecal {

// Deterministic computer model eta(x, t): raw control inputs in, raw
// calibration parameters in, one scalar response out (raw units).
class Simulator {
 public:
  virtual ~Simulator() = default;

  virtual int dim_x() const = 0;
  virtual int n_params() const = 0;

  // Whether several requests may be outstanding at once (external models).
  virtual bool concurrent_safe() const { return false; }

  virtual double eval(const Eigen::VectorXd& x_raw,
                      const Eigen::VectorXd& t_raw) = 0;

  // Row i of x_raw with row i of t_raw.  Default: sequential eval calls.
  virtual Eigen::VectorXd eval_batch(const Eigen::MatrixXd& x_raw,
                                     const Eigen::MatrixXd& t_raw);
};

// Built-in closed-form models, reachable from run configurations:
//   "quadratic":  eta(x, t1, t2) = t1 + t2 * x^2      (1 input, 2 parameters)
//   "offset":     eta(x, t1)     = t1                 (1 input, 1 parameter)
std::unique_ptr<Simulator> make_builtin_simulator(const std::string& name);

}  // namespace statecal
