#pragma once

#include <string_view>

namespace statecal {

// Link g mapping the scaled parameter in (0,1) to the real line, where the
// Gaussian-process prior lives.  identity is the degenerate "no transform"
// case used when the parameter path is taken on its scaled (0,1) axis.
enum class LinkKind { logit, probit, cloglog, identity };

namespace linkfun {

// g(u).  Domain (0,1) for the proper links; [0,1] for identity.
double apply(LinkKind link, double u);

// g^{-1}(w); total inverse on the reals for the proper links.
double invert(LinkKind link, double w);

// g(0.5): the conventional centering value for the process mean.
double center(LinkKind link);

// log |d g^{-1}(w) / dw|.  Change-of-variables term when a uniform prior on
// the (0,1) scale is expressed on the link scale.
double log_inv_deriv(LinkKind link, double w);

// cloglog is monotone decreasing; the others increase.
bool increasing(LinkKind link);

const char* name(LinkKind link);
LinkKind parse(std::string_view text);  // throws ErrorCode::config on unknown

// Standard normal helpers shared with the diagnostics code.
double norm_cdf(double x);
double norm_quantile(double p);  // Wichura AS241, |relative err| < 1e-15

}  // namespace linkfun
}  // namespace statecal
