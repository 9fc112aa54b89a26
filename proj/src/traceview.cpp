#include "traceview.hpp"

#include "error.hpp"
#include "model.hpp"

namespace statecal {

std::optional<double> DrawView::theta2_unit() const {
  if (!xi) return std::nullopt;
  return model::theta2_from_xi(*xi);
}

TraceView::TraceView(const sampler::TraceSet& trace, const ModelSpec& spec,
                     int n_design)
    : trace_(trace), spec_(spec), n_design_(n_design) {
  n_draws_ = trace.n_combined();
  require(!trace.chains.empty(), ErrorCode::invalid_argument,
          "trace set has no chains");
  switch (spec.variant) {
    case Variant::gp:
      z_cols_.reserve(static_cast<size_t>(n_design));
      for (int i = 1; i <= n_design; ++i)
        z_cols_.push_back(trace.column("z_" + std::to_string(i)));
      nu_col_ = trace.column("nu");
      lambda_theta_col_ = trace.column("lambda_theta");
      break;
    case Variant::parametric_sqrt:
      beta0_col_ = trace.column("beta0");
      beta1_col_ = trace.column("beta1");
      break;
    case Variant::constant:
      w_col_ = trace.column("w");
      break;
  }
  if (spec.has_theta2()) xi_col_ = trace.column("xi");
  lambda_y_col_ = trace.column("lambda_y");
}

DrawView TraceView::draw(int k) const {
  require(k >= 0 && k < n_draws_, ErrorCode::invalid_argument,
          "draw index out of range");
  int chain = 0;
  int row = k;
  while (row >= trace_.chains[static_cast<size_t>(chain)].n_recorded()) {
    row -= trace_.chains[static_cast<size_t>(chain)].n_recorded();
    ++chain;
  }
  const auto& draws = trace_.chains[static_cast<size_t>(chain)].draws;

  DrawView view;
  switch (spec_.variant) {
    case Variant::gp: {
      view.z.resize(n_design_);
      for (int i = 0; i < n_design_; ++i)
        view.z(i) = draws(row, z_cols_[static_cast<size_t>(i)]);
      view.nu = draws(row, nu_col_);
      view.lambda_theta = draws(row, lambda_theta_col_);
      break;
    }
    case Variant::parametric_sqrt:
      view.beta0 = draws(row, beta0_col_);
      view.beta1 = draws(row, beta1_col_);
      break;
    case Variant::constant:
      view.w = draws(row, w_col_);
      break;
  }
  if (xi_col_ >= 0) view.xi = draws(row, xi_col_);
  view.lambda_y = draws(row, lambda_y_col_);
  return view;
}

}  // namespace statecal
