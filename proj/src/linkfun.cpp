#include "linkfun.hpp"

#include <cmath>
#include <string>

#include "error.hpp"

namespace statecal::linkfun {

namespace {

void check_unit(LinkKind link, double u) {
  const bool open = link != LinkKind::identity;
  const bool ok = open ? (u > 0.0 && u < 1.0) : (u >= 0.0 && u <= 1.0);
  require(ok, ErrorCode::invalid_argument,
          std::string(name(link)) + " link argument " + std::to_string(u) +
              " outside the unit interval");
}

// log(1/(1+e^{-w})), stable on both tails.
double log_sigmoid(double w) {
  return w >= 0.0 ? -std::log1p(std::exp(-w)) : w - std::log1p(std::exp(w));
}

}  // namespace

double norm_cdf(double x) { return 0.5 * std::erfc(-x * M_SQRT1_2); }

double norm_quantile(double p) {
  // Wichura (1988) algorithm AS241, PPND16.
  require(p > 0.0 && p < 1.0, ErrorCode::invalid_argument,
          "norm_quantile needs p in (0,1)");
  const double q = p - 0.5;
  double r;
  if (std::fabs(q) <= 0.425) {
    r = 0.180625 - q * q;
    return q *
           (((((((2.5090809287301226727e3 * r + 3.3430575583588128105e4) * r +
                 6.7265770927008700853e4) * r + 4.5921953931549871457e4) * r +
               1.3731693765509461125e4) * r + 1.9715909503065514427e3) * r +
             1.3314166789178437745e2) * r + 3.3871328727963666080e0) /
           (((((((5.2264952788528545610e3 * r + 2.8729085735721942674e4) * r +
                 3.9307895800092710610e4) * r + 2.1213794301586595867e4) * r +
               5.3941960214247511077e3) * r + 6.8718700749205790830e2) * r +
             4.2313330701600911252e1) * r + 1.0);
  }
  r = q < 0.0 ? p : 1.0 - p;
  r = std::sqrt(-std::log(r));
  double value;
  if (r <= 5.0) {
    r -= 1.6;
    value = (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
                  2.41780725177450611770e-1) * r + 1.27045825245236838258e0) * r +
                3.64784832476320460504e0) * r + 5.76949722146069140550e0) * r +
              4.63033784615654529590e0) * r + 1.42343711074968357734e0) /
            (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
                  1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r +
                6.89767334985100004550e-1) * r + 1.67638483018380384940e0) * r +
              2.05319162663775882187e0) * r + 1.0);
  } else {
    r -= 5.0;
    value = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
                  1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r +
                2.96560571828504891230e-1) * r + 1.78482653991729133580e0) * r +
              5.46378491116411436990e0) * r + 6.65790464350110377720e0) /
            (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
                  1.84631831751005468180e-5) * r + 7.86869131145613259100e-4) * r +
                1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r +
              5.99832206555887937690e-1) * r + 1.0);
  }
  return q < 0.0 ? -value : value;
}

double apply(LinkKind link, double u) {
  check_unit(link, u);
  switch (link) {
    case LinkKind::logit: return std::log(u / (1.0 - u));
    case LinkKind::probit: return norm_quantile(u);
    case LinkKind::cloglog: return std::log(-std::log(u));
    case LinkKind::identity: return u;
  }
  fail(ErrorCode::runtime, "unreachable link");
}

double invert(LinkKind link, double w) {
  switch (link) {
    case LinkKind::logit: return 1.0 / (1.0 + std::exp(-w));
    case LinkKind::probit: return norm_cdf(w);
    case LinkKind::cloglog: return std::exp(-std::exp(w));
    case LinkKind::identity:
      check_unit(link, w);
      return w;
  }
  fail(ErrorCode::runtime, "unreachable link");
}

double center(LinkKind link) {
  switch (link) {
    case LinkKind::logit: return 0.0;
    case LinkKind::probit: return 0.0;
    case LinkKind::cloglog: return std::log(std::log(2.0));
    case LinkKind::identity: return 0.5;
  }
  fail(ErrorCode::runtime, "unreachable link");
}

double log_inv_deriv(LinkKind link, double w) {
  switch (link) {
    case LinkKind::logit: return log_sigmoid(w) + log_sigmoid(-w);
    case LinkKind::probit: return -0.5 * w * w - 0.5 * std::log(2.0 * M_PI);
    case LinkKind::cloglog: return w - std::exp(w);
    case LinkKind::identity: return 0.0;
  }
  fail(ErrorCode::runtime, "unreachable link");
}

bool increasing(LinkKind link) { return link != LinkKind::cloglog; }

const char* name(LinkKind link) {
  switch (link) {
    case LinkKind::logit: return "logit";
    case LinkKind::probit: return "probit";
    case LinkKind::cloglog: return "cloglog";
    case LinkKind::identity: return "identity";
  }
  return "?";
}

LinkKind parse(std::string_view text) {
  if (text == "logit") return LinkKind::logit;
  if (text == "probit") return LinkKind::probit;
  if (text == "cloglog") return LinkKind::cloglog;
  if (text == "identity") return LinkKind::identity;
  fail(ErrorCode::config, "unknown link \"" + std::string(text) +
                              "\" (expected logit, probit, cloglog, or identity)");
}

}  // namespace statecal::linkfun
