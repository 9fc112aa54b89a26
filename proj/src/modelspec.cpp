#include "modelspec.hpp"

#include "error.hpp"

namespace statecal {

const char* variant_name(Variant v) {
  switch (v) {
    case Variant::gp: return "gp";
    case Variant::parametric_sqrt: return "parametric_sqrt";
    case Variant::constant: return "constant";
  }
  return "?";
}

Variant parse_variant(const std::string& text) {
  if (text == "gp") return Variant::gp;
  if (text == "parametric_sqrt") return Variant::parametric_sqrt;
  if (text == "constant") return Variant::constant;
  fail(ErrorCode::config, "unknown variant \"" + text +
                              "\" (expected gp, parametric_sqrt, or constant)");
}

double ParameterSpec::scale(double raw) const {
  require(raw >= lower && raw <= upper, ErrorCode::invalid_argument,
          "parameter " + name + " value " + std::to_string(raw) +
              " outside [" + std::to_string(lower) + ", " +
              std::to_string(upper) + "]");
  return (raw - lower) / (upper - lower);
}

double ParameterSpec::unscale(double unit) const {
  require(unit >= 0.0 && unit <= 1.0, ErrorCode::invalid_argument,
          "parameter " + name + " scaled value " + std::to_string(unit) +
              " outside [0, 1]");
  return lower + (upper - lower) * unit;
}

double default_a_lambda_theta(LinkKind link) {
  return link == LinkKind::identity ? 5.0 : 0.01;
}

double ModelSpec::mu() const {
  return mu_theta ? *mu_theta : linkfun::center(link);
}

void ModelSpec::validate() const {
  require(!parameters.empty() && parameters.size() <= 2, ErrorCode::config,
          "model needs one or two calibration parameters");
  require(parameters[0].role == ParameterSpec::Role::functional ||
              variant == Variant::constant,
          ErrorCode::config, "first parameter must be the functional one");
  if (parameters.size() > 1)
    require(parameters[1].role == ParameterSpec::Role::constant,
            ErrorCode::config, "second parameter must be state-independent");
  for (const auto& p : parameters) {
    require(p.upper > p.lower, ErrorCode::config,
            "parameter " + p.name + " has an empty range");
    for (const auto& c : p.constraints) {
      require(&p == &parameters[0], ErrorCode::config,
              "constraints are only supported on the first parameter");
      require(c.upper > c.lower, ErrorCode::config,
              "parameter " + p.name + " has an empty constraint interval");
      // Windows may extend past the box, but must overlap it.
      require(std::max(c.lower, p.lower) < std::min(c.upper, p.upper),
              ErrorCode::config,
              "constraint window on " + p.name +
                  " does not intersect the parameter bounds");
    }
  }
  if (variant == Variant::constant)
    require(parameters[0].constraints.empty(), ErrorCode::config,
            "path constraints do not apply to a constant parameter");
  const auto& h = hyper;
  require(h.a_y > 0 && h.b_y > 0 && h.a_lambda_theta > 0 &&
              h.b_lambda_theta > 0 && h.b_rho > 0,
          ErrorCode::config, "hyperprior parameters must be positive");
}

}  // namespace statecal
