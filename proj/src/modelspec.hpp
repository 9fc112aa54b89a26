#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "linkfun.hpp"

namespace statecal {

// How the state-dependent first parameter is modeled.
enum class Variant {
  gp,               // nonparametric link-scale Gaussian-process path
  parametric_sqrt,  // theta1(x) = beta0 + beta1 * sqrt(x) on the scaled axis
  constant,         // state-independent theta1
};

const char* variant_name(Variant v);
Variant parse_variant(const std::string& text);

// Interval constraint on the raw parameter path at one control-input site.
struct PathConstraint {
  Eigen::VectorXd x_scaled;  // site, scaled frame
  double lower = 0.0;        // raw units, exclusive
  double upper = 0.0;        // raw units, exclusive
};

struct ParameterSpec {
  enum class Role { functional, constant };

  std::string name;
  Role role = Role::constant;
  double lower = 0.0;  // raw-scale box
  double upper = 1.0;
  std::vector<PathConstraint> constraints;  // functional role only

  // Affine map between the raw box and (0,1).  Throws outside the box.
  double scale(double raw) const;
  double unscale(double unit) const;
};

struct Hyperpriors {
  double a_y = 5.0;  // response precision lambda_y ~ Ga(a_y, b_y)
  double b_y = 5.0;
  double a_lambda_theta = 0.01;  // process precision lambda_theta
  double b_lambda_theta = 0.01;
  double b_rho = 0.2;  // rho ~ Beta(1, b_rho)
};

// Link-dependent default for the process-precision shape/rate: tight (5)
// under identity where the path lives directly on (0,1), diffuse (0.01)
// otherwise.
double default_a_lambda_theta(LinkKind link);

struct ModelSpec {
  Variant variant = Variant::gp;
  LinkKind link = LinkKind::logit;
  Hyperpriors hyper;
  std::optional<double> mu_theta;  // link-scale process mean; default g(0.5)

  // First entry is the calibrated state-dependent (or constant-variant)
  // parameter; an optional second entry is a state-independent companion.
  std::vector<ParameterSpec> parameters;

  int n_params() const { return static_cast<int>(parameters.size()); }
  const ParameterSpec& theta1() const { return parameters.at(0); }
  bool has_theta2() const { return parameters.size() > 1; }
  const ParameterSpec& theta2() const { return parameters.at(1); }
  double mu() const;  // resolved process mean

  void validate() const;  // throws ErrorCode::config on inconsistency
};

}  // namespace statecal
