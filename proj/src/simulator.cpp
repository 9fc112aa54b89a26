#include "simulator.hpp"

#include "error.hpp"

namespace statecal {

Eigen::VectorXd Simulator::eval_batch(const Eigen::MatrixXd& x_raw,
                                      const Eigen::MatrixXd& t_raw) {
  require(x_raw.rows() == t_raw.rows(), ErrorCode::invalid_argument,
          "eval_batch: input and parameter row counts differ");
  Eigen::VectorXd out(x_raw.rows());
  for (Eigen::Index i = 0; i < x_raw.rows(); ++i)
    out(i) = eval(x_raw.row(i), t_raw.row(i));
  return out;
}

namespace {

class QuadraticSim final : public Simulator {
 public:
  int dim_x() const override { return 1; }
  int n_params() const override { return 2; }
  bool concurrent_safe() const override { return true; }
  double eval(const Eigen::VectorXd& x, const Eigen::VectorXd& t) override {
    return t(0) + t(1) * x(0) * x(0);
  }
};

class OffsetSim final : public Simulator {
 public:
  int dim_x() const override { return 1; }
  int n_params() const override { return 1; }
  bool concurrent_safe() const override { return true; }
  double eval(const Eigen::VectorXd&, const Eigen::VectorXd& t) override {
    return t(0);
  }
};

}  // namespace

std::unique_ptr<Simulator> make_builtin_simulator(const std::string& name) {
  if (name == "quadratic") return std::make_unique<QuadraticSim>();
  if (name == "offset") return std::make_unique<OffsetSim>();
  fail(ErrorCode::config,
       "unknown built-in simulator \"" + name + "\" (expected quadratic or offset)");
}

}  // namespace statecal
