#include "sampler.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <thread>

#include "error.hpp"
#include "gp.hpp"
#include "linkfun.hpp"
#include "model.hpp"

namespace statecal::sampler {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr int kInitAttempts = 100000;
constexpr int kBurnTail = 1000;  // reporting window for late-burn-in rates
}  // namespace

void ChainConfig::validate() const {
  require(n_burn >= 1, ErrorCode::config, "n_burn must be at least 1");
  require(n_post >= 0, ErrorCode::config, "n_post must be non-negative");
  require(thin >= 1, ErrorCode::config, "thin must be at least 1");
  require(n_post % thin == 0, ErrorCode::config,
          "thin must divide n_post evenly");
  require(n_chains >= 1, ErrorCode::config, "n_chains must be at least 1");
  require(adapt_interval >= 1, ErrorCode::config,
          "adapt_interval must be at least 1");
  const bool targets_ok =
      target_scalar_lo > 0 && target_scalar_lo < target_scalar_hi &&
      target_scalar_hi < 1 && target_block_lo > 0 &&
      target_block_lo < target_block_hi && target_block_hi < 1;
  require(targets_ok, ErrorCode::config,
          "acceptance-target intervals must be ordered and inside (0,1)");
}

int ChainTrace::column(const std::string& name) const {
  for (size_t j = 0; j < columns.size(); ++j)
    if (columns[j] == name) return static_cast<int>(j);
  fail(ErrorCode::invalid_argument, "trace has no column named " + name);
}

Eigen::VectorXd ChainTrace::series(const std::string& name) const {
  return draws.col(column(name));
}

int TraceSet::n_combined() const {
  int total = 0;
  for (const auto& c : chains) total += c.n_recorded();
  return total;
}

int TraceSet::column(const std::string& name) const {
  for (size_t j = 0; j < columns.size(); ++j)
    if (columns[j] == name) return static_cast<int>(j);
  fail(ErrorCode::invalid_argument, "trace has no column named " + name);
}

Eigen::VectorXd TraceSet::combined(const std::string& name) const {
  const int j = column(name);
  Eigen::VectorXd out(n_combined());
  Eigen::Index at = 0;
  for (const auto& c : chains) {
    out.segment(at, c.draws.rows()) = c.draws.col(j);
    at += c.draws.rows();
  }
  return out;
}

Eigen::VectorXd propose_theta1_block(const Eigen::VectorXd& z,
                                     const Eigen::MatrixXd& root, double c,
                                     Rng& rng) {
  Eigen::VectorXd eps(z.size());
  for (Eigen::Index i = 0; i < eps.size(); ++i) eps(i) = rng.normal();
  return z + c * (root * eps);
}

bool mh_accept(double log_target_new, double log_target_old, Rng& rng) {
  if (log_target_new == -kInf) return false;
  if (log_target_old == -kInf) return true;
  if (log_target_new >= log_target_old) return true;
  return std::log(rng.uniform()) < log_target_new - log_target_old;
}

double adapt_scale(double scale, double rate, double target_lo,
                   double target_hi) {
  if (rate > target_hi) return scale * 1.1;
  if (rate < target_lo) return scale / 1.1;
  return scale;
}

double rhat(const std::vector<Eigen::VectorXd>& chains) {
  require(chains.size() >= 2, ErrorCode::invalid_argument,
          "rhat needs at least two chains");
  Eigen::Index half = std::numeric_limits<Eigen::Index>::max();
  for (const auto& c : chains) {
    require(c.size() >= 10, ErrorCode::invalid_argument,
            "rhat needs at least 10 draws per chain");
    half = std::min(half, c.size() / 2);
  }
  std::vector<Eigen::VectorXd> halves;
  for (const auto& c : chains) {
    halves.push_back(c.head(half));
    halves.push_back(c.tail(half));
  }
  const auto m = static_cast<double>(halves.size());
  const auto n = static_cast<double>(half);
  Eigen::VectorXd means(halves.size()), vars(halves.size());
  for (size_t j = 0; j < halves.size(); ++j) {
    means(static_cast<Eigen::Index>(j)) = halves[j].mean();
    vars(static_cast<Eigen::Index>(j)) =
        (halves[j].array() - means(static_cast<Eigen::Index>(j)))
            .square()
            .sum() /
        (n - 1.0);
  }
  const double grand = means.mean();
  const double b = n * (means.array() - grand).square().sum() / (m - 1.0);
  const double w = vars.mean();
  if (w <= 0.0) return b <= 0.0 ? 1.0 : kInf;
  const double var_plus = (n - 1.0) / n * w + b / n;
  return std::sqrt(var_plus / w);
}

namespace {

double clamp_rho(double rho) {
  return std::min(std::max(rho, 1e-8), 1.0 - 1e-8);
}

// Link-scale start path: anchors drawn uniformly inside constraint windows,
// remainder completed from the conditional correlation structure with unit
// process variance.  A start scaled by a diffuse precision draw saturates the
// link (|z| ~ 1/sqrt(lambda_theta)) and freezes every downstream block, so
// the path draw is deliberately O(1); the first lambda_theta Gibbs and nu
// updates then re-equilibrate the hyperparameters to the path.
Eigen::VectorXd draw_start_path(const ModelSpec& spec, const FieldDataset& data,
                                double rho, Rng& rng) {
  const double mu = spec.mu();
  const auto& cons = spec.theta1().constraints;
  const Eigen::Index n = data.n();
  Eigen::VectorXd z(n);

  if (cons.empty()) {
    const gp::CorrFactors factors(data.x_scaled, rho);
    Eigen::VectorXd eps(n);
    for (Eigen::Index i = 0; i < n; ++i) eps(i) = rng.normal();
    z = (mu + (factors.sample_root() * eps).array()).matrix();
    if (spec.link != LinkKind::identity)
      z = z.array().min(mu + 8.0).max(mu - 8.0).matrix();
    return z;
  }

  const auto rows = model::constraint_design_rows(cons, data.x_scaled);
  const auto& box = spec.theta1();
  Eigen::VectorXd z_anchor(static_cast<Eigen::Index>(rows.size()));
  Eigen::MatrixXd x_anchor(static_cast<Eigen::Index>(rows.size()),
                           data.x_scaled.cols());
  std::vector<bool> anchored(static_cast<size_t>(n), false);
  for (size_t c = 0; c < rows.size(); ++c) {
    const double lo = std::max(cons[c].lower, box.lower);
    const double hi = std::min(cons[c].upper, box.upper);
    const double raw = rng.uniform(lo, hi);
    z_anchor(static_cast<Eigen::Index>(c)) =
        linkfun::apply(spec.link, box.scale(raw));
    x_anchor.row(static_cast<Eigen::Index>(c)) = data.x_scaled.row(rows[c]);
    anchored[static_cast<size_t>(rows[c])] = true;
    z(rows[c]) = z_anchor(static_cast<Eigen::Index>(c));
  }

  std::vector<int> free_rows;
  for (Eigen::Index i = 0; i < n; ++i)
    if (!anchored[static_cast<size_t>(i)]) free_rows.push_back(static_cast<int>(i));
  if (!free_rows.empty()) {
    Eigen::MatrixXd x_free(static_cast<Eigen::Index>(free_rows.size()),
                           data.x_scaled.cols());
    for (size_t i = 0; i < free_rows.size(); ++i)
      x_free.row(static_cast<Eigen::Index>(i)) = data.x_scaled.row(free_rows[i]);
    const auto cond = gp::conditional(z_anchor, x_anchor, x_free,
                                      {rho, 1.0, mu});
    const Eigen::MatrixXd root = gp::psd_sample_root(cond.cov);
    Eigen::VectorXd eps(root.cols());
    for (Eigen::Index i = 0; i < eps.size(); ++i) eps(i) = rng.normal();
    Eigen::VectorXd z_free = cond.mean + root * eps;
    if (spec.link != LinkKind::identity)
      z_free = z_free.array().min(mu + 8.0).max(mu - 8.0).matrix();
    for (size_t i = 0; i < free_rows.size(); ++i)
      z(free_rows[i]) = z_free(static_cast<Eigen::Index>(i));
  }
  return z;
}

bool identity_path_ok(const ModelSpec& spec, const Eigen::VectorXd& z) {
  if (spec.link != LinkKind::identity) return true;
  return (z.array() > 0.0).all() && (z.array() < 1.0).all();
}

}  // namespace

ChainState initialize_state(const ModelSpec& spec, const FieldDataset& data,
                            Rng& rng) {
  spec.validate();
  ChainState state;
  const auto& h = spec.hyper;

  auto draw_common = [&] {
    state.lambda_y = rng.gamma(h.a_y, h.b_y);
    if (spec.has_theta2())
      state.xi = model::xi_from_theta2(rng.uniform());
    else
      state.xi.reset();
  };

  switch (spec.variant) {
    case Variant::gp: {
      for (int attempt = 0; attempt < kInitAttempts; ++attempt) {
        // The prior concentrates rho near 1, where the correlation matrix
        // is numerically near rank-one: the spectral proposal root then has
        // almost no usable directions and the path cannot bend until the
        // smoothness itself has random-walked down, which costs thousands of
        // sweeps. Cap the starting correlation at a moderate value so the
        // block update has full-rank moves from the first sweep.
        const double rho = std::min(clamp_rho(rng.beta_one(h.b_rho)), 0.5);
        state.nu = model::nu_from_rho(rho);
        state.lambda_theta =
            std::max(rng.gamma(h.a_lambda_theta, h.b_lambda_theta), 1e-300);
        draw_common();
        state.z = draw_start_path(spec, data, rho, rng);
        if (!identity_path_ok(spec, state.z)) continue;
        return state;
      }
      fail(ErrorCode::runtime,
           "no feasible starting state after 100000 attempts; "
           "constraints may be unsatisfiable");
    }
    case Variant::parametric_sqrt: {
      require(data.dim_x() == 1, ErrorCode::config,
              "the square-root parametric path needs a single control input");
      const double sqrt_xmax = std::sqrt(data.x_scaled.col(0).maxCoeff());
      require(sqrt_xmax > 0.0, ErrorCode::config,
              "degenerate design for the parametric path");
      const auto& cons = spec.theta1().constraints;
      const auto rows = model::constraint_design_rows(cons, data.x_scaled);
      for (int attempt = 0; attempt < kInitAttempts; ++attempt) {
        const double u0 = rng.uniform(0.05, 0.95);
        const double u1 = rng.uniform(0.05, 0.95);
        state.beta0 = u0;
        state.beta1 = (u1 - u0) / sqrt_xmax;
        draw_common();
        if (!cons.empty()) {
          Eigen::VectorXd raw(static_cast<Eigen::Index>(cons.size()));
          for (size_t c = 0; c < cons.size(); ++c)
            raw(static_cast<Eigen::Index>(c)) = spec.theta1().unscale(
                state.beta0 +
                state.beta1 * std::sqrt(data.x_scaled(rows[c], 0)));
          if (!model::check_constraints(cons, raw)) continue;
        }
        return state;
      }
      fail(ErrorCode::runtime,
           "no feasible starting state after 100000 attempts; "
           "constraints may be unsatisfiable");
    }
    case Variant::constant: {
      state.w = model::xi_from_theta2(rng.uniform());
      draw_common();
      return state;
    }
  }
  fail(ErrorCode::runtime, "unreachable variant");
}

namespace {

// Metropolis-within-Gibbs runner for one chain.
class Runner {
 public:
  Runner(const ModelSpec& spec, const FieldDataset& data, Simulator& sim,
         const ChainConfig& cfg, int chain_index)
      : spec_(spec),
        data_(data),
        sim_(sim),
        cfg_(cfg),
        chain_index_(chain_index),
        rng_(Rng::for_stream(cfg.seed, static_cast<std::uint64_t>(chain_index))),
        constraint_rows_(model::constraint_design_rows(
            spec.theta1().constraints, data.x_scaled)) {
    state_ = initialize_state(spec_, data_, rng_);
    if (spec_.variant == Variant::gp) {
      factors_ = gp::CorrFactors(data_.x_scaled, model::rho_from_nu(state_.nu));
      quad_ = factors_.quad_form(centered(state_.z));
    }
    ssr_ = current_ssr(theta2_unit());

    if (spec_.variant == Variant::gp) blocks_.push_back(make_block("theta1", false));
    if (spec_.variant == Variant::parametric_sqrt)
      blocks_.push_back(make_block("beta", false));
    if (spec_.variant == Variant::constant) blocks_.push_back(make_block("w", true));
    if (state_.xi) blocks_.push_back(make_block("xi", true));
    if (spec_.variant == Variant::gp) blocks_.push_back(make_block("nu", true));
  }

  ChainTrace run() {
    for (int it = 1; it <= cfg_.n_burn; ++it) {
      in_burn_tail_ = it > cfg_.n_burn - kBurnTail;
      sweep();
      if (it % cfg_.adapt_interval == 0) adapt_all();
    }
    in_burn_tail_ = false;
    post_phase_ = true;

    ChainTrace trace;
    trace.chain_index = chain_index_;
    trace.columns = column_names();
    trace.draws.resize(cfg_.n_recorded(),
                       static_cast<Eigen::Index>(trace.columns.size()));
    int rec = 0;
    for (int s = 1; s <= cfg_.n_post; ++s) {
      sweep();
      if (s % cfg_.thin == 0) record_row(trace, rec++, cfg_.n_burn + s);
    }
    for (auto& b : blocks_) {
      b.stats.scale = b.scale;
      b.stats.accept_post =
          b.post_att > 0 ? static_cast<double>(b.post_acc) / b.post_att : 0.0;
      b.stats.accept_burn_tail =
          b.tail_att > 0 ? static_cast<double>(b.tail_acc) / b.tail_att : 0.0;
      trace.blocks.push_back(b.stats);
    }
    return trace;
  }

 private:
  struct Block {
    BlockStats stats;
    double scale = 1.0;
    long win_acc = 0, win_att = 0;
    long tail_acc = 0, tail_att = 0;
    long post_acc = 0, post_att = 0;
  };

  Block make_block(const std::string& name, bool scalar) {
    Block b;
    b.stats.name = name;
    b.stats.scalar_target = scalar;
    b.scale = scalar ? 1.0 : 0.3;
    return b;
  }

  Eigen::ArrayXd centered(const Eigen::VectorXd& z) const {
    return z.array() - spec_.mu();
  }

  std::optional<double> theta2_unit() const {
    if (!state_.xi) return std::nullopt;
    return model::theta2_from_xi(*state_.xi);
  }

  Eigen::VectorXd unit_path() const {
    switch (spec_.variant) {
      case Variant::gp: {
        Eigen::VectorXd u(state_.z.size());
        for (Eigen::Index i = 0; i < u.size(); ++i)
          u(i) = linkfun::invert(spec_.link, state_.z(i));
        return u;
      }
      case Variant::parametric_sqrt:
        return (state_.beta0 +
                state_.beta1 * data_.x_scaled.col(0).array().sqrt())
            .matrix();
      case Variant::constant:
        return Eigen::VectorXd::Constant(data_.n(),
                                         model::theta2_from_xi(state_.w));
    }
    fail(ErrorCode::runtime, "unreachable variant");
  }

  double current_ssr(std::optional<double> th2) {
    if (spec_.variant == Variant::gp)
      return model::ssr(state_.z, th2, data_, sim_, spec_);
    return model::ssr_unit(unit_path(), th2, data_, sim_, spec_);
  }

  bool constraints_ok_raw(const Eigen::VectorXd& raw_at_sites) const {
    return model::check_constraints(spec_.theta1().constraints, raw_at_sites);
  }

  void tally(Block& b, bool accepted) {
    if (post_phase_) {
      ++b.post_att;
      b.post_acc += accepted;
      return;
    }
    ++b.win_att;
    b.win_acc += accepted;
    if (in_burn_tail_) {
      ++b.tail_att;
      b.tail_acc += accepted;
    }
  }

  void adapt_all() {
    for (auto& b : blocks_) {
      const double rate =
          b.win_att > 0 ? static_cast<double>(b.win_acc) / b.win_att : 0.0;
      b.stats.accept_final_window = rate;
      const bool scalar = b.stats.scalar_target;
      b.scale = adapt_scale(b.scale, rate,
                            scalar ? cfg_.target_scalar_lo : cfg_.target_block_lo,
                            scalar ? cfg_.target_scalar_hi : cfg_.target_block_hi);
      b.win_acc = b.win_att = 0;
    }
  }

  Block& block(const std::string& name) {
    for (auto& b : blocks_)
      if (b.stats.name == name) return b;
    fail(ErrorCode::runtime, "no block named " + name);
  }

  // --- block updates ---

  void update_theta1_gp() {
    Block& b = block("theta1");
    const Eigen::VectorXd cand =
        propose_theta1_block(state_.z, factors_.sample_root(), b.scale, rng_);
    bool accepted = false;
    if (identity_path_ok(spec_, cand)) {
      bool feasible = true;
      if (!constraint_rows_.empty()) {
        Eigen::VectorXd raw(static_cast<Eigen::Index>(constraint_rows_.size()));
        for (size_t c = 0; c < constraint_rows_.size(); ++c)
          raw(static_cast<Eigen::Index>(c)) = spec_.theta1().unscale(
              linkfun::invert(spec_.link, cand(constraint_rows_[c])));
        feasible = constraints_ok_raw(raw);
      }
      if (feasible) {
        const double ssr_c = model::ssr(cand, theta2_unit(), data_, sim_, spec_);
        const double quad_c = factors_.quad_form(centered(cand).matrix());
        const double log_new =
            -0.5 * state_.lambda_y * ssr_c - 0.5 * state_.lambda_theta * quad_c;
        const double log_old =
            -0.5 * state_.lambda_y * ssr_ - 0.5 * state_.lambda_theta * quad_;
        if (mh_accept(log_new, log_old, rng_)) {
          state_.z = cand;
          ssr_ = ssr_c;
          quad_ = quad_c;
          accepted = true;
        }
      }
    }
    tally(b, accepted);
  }

  void update_beta() {
    Block& b = block("beta");
    const double c0 = state_.beta0 + b.scale * rng_.normal();
    const double c1 = state_.beta1 + b.scale * rng_.normal();
    const Eigen::VectorXd path =
        (c0 + c1 * data_.x_scaled.col(0).array().sqrt()).matrix();
    bool accepted = false;
    if ((path.array() > 0.0).all() && (path.array() < 1.0).all()) {
      bool feasible = true;
      if (!constraint_rows_.empty()) {
        Eigen::VectorXd raw(static_cast<Eigen::Index>(constraint_rows_.size()));
        for (size_t c = 0; c < constraint_rows_.size(); ++c)
          raw(static_cast<Eigen::Index>(c)) =
              spec_.theta1().unscale(path(constraint_rows_[c]));
        feasible = constraints_ok_raw(raw);
      }
      if (feasible) {
        const double ssr_c =
            model::ssr_unit(path, theta2_unit(), data_, sim_, spec_);
        if (mh_accept(-0.5 * state_.lambda_y * ssr_c,
                      -0.5 * state_.lambda_y * ssr_, rng_)) {
          state_.beta0 = c0;
          state_.beta1 = c1;
          ssr_ = ssr_c;
          accepted = true;
        }
      }
    }
    tally(b, accepted);
  }

  void update_w() {
    Block& b = block("w");
    const double cand = state_.w + b.scale * rng_.normal();
    const double unit = model::theta2_from_xi(cand);
    bool accepted = false;
    if (unit > 0.0 && unit < 1.0) {
      const Eigen::VectorXd path = Eigen::VectorXd::Constant(data_.n(), unit);
      const double ssr_c =
          model::ssr_unit(path, theta2_unit(), data_, sim_, spec_);
      const double log_new =
          -0.5 * state_.lambda_y * ssr_c + cand - std::exp(cand);
      const double log_old =
          -0.5 * state_.lambda_y * ssr_ + state_.w - std::exp(state_.w);
      if (mh_accept(log_new, log_old, rng_)) {
        state_.w = cand;
        ssr_ = ssr_c;
        accepted = true;
      }
    }
    tally(b, accepted);
  }

  void update_xi() {
    Block& b = block("xi");
    const double cand = *state_.xi + b.scale * rng_.normal();
    const double th2 = model::theta2_from_xi(cand);
    bool accepted = false;
    if (th2 > 0.0 && th2 < 1.0) {
      const double ssr_c = current_ssr(th2);
      const double log_new =
          -0.5 * state_.lambda_y * ssr_c + cand - std::exp(cand);
      const double log_old =
          -0.5 * state_.lambda_y * ssr_ + *state_.xi - std::exp(*state_.xi);
      if (mh_accept(log_new, log_old, rng_)) {
        state_.xi = cand;
        ssr_ = ssr_c;
        accepted = true;
      }
    }
    tally(b, accepted);
  }

  void update_lambda_y() {
    state_.lambda_y =
        model::draw_lambda_y_from_ssr(ssr_, data_.n(), spec_.hyper, rng_);
  }

  void update_lambda_theta() {
    state_.lambda_theta = model::draw_lambda_theta_from_quad(
        quad_, data_.n(), spec_.hyper, rng_);
  }

  void update_nu() {
    Block& b = block("nu");
    const double cand = state_.nu + b.scale * rng_.normal();
    const double rho_c = model::rho_from_nu(cand);
    bool accepted = false;
    if (rho_c > 0.0 && rho_c < 1.0) {
      gp::CorrFactors cand_factors(data_.x_scaled, rho_c);
      const double quad_c = cand_factors.quad_form(centered(state_.z).matrix());
      const double log_new = cand_factors.logdet_half_inv() -
                             0.5 * state_.lambda_theta * quad_c +
                             model::log_prior_nu(cand, spec_.hyper.b_rho);
      const double log_old = factors_.logdet_half_inv() -
                             0.5 * state_.lambda_theta * quad_ +
                             model::log_prior_nu(state_.nu, spec_.hyper.b_rho);
      if (mh_accept(log_new, log_old, rng_)) {
        state_.nu = cand;
        factors_ = std::move(cand_factors);
        quad_ = quad_c;
        accepted = true;
      }
    }
    tally(b, accepted);
  }

  void sweep() {
    switch (spec_.variant) {
      case Variant::gp: update_theta1_gp(); break;
      case Variant::parametric_sqrt: update_beta(); break;
      case Variant::constant: update_w(); break;
    }
    if (state_.xi) update_xi();
    update_lambda_y();
    if (spec_.variant == Variant::gp) {
      update_lambda_theta();
      update_nu();
    }
  }

  // --- recording ---

  std::vector<std::string> column_names() const {
    std::vector<std::string> cols{"iteration"};
    switch (spec_.variant) {
      case Variant::gp:
        for (int i = 1; i <= data_.n(); ++i)
          cols.push_back("z_" + std::to_string(i));
        break;
      case Variant::parametric_sqrt:
        cols.push_back("beta0");
        cols.push_back("beta1");
        break;
      case Variant::constant:
        cols.push_back("w");
        break;
    }
    if (state_.xi) cols.push_back("xi");
    if (spec_.variant == Variant::gp) {
      cols.push_back("nu");
      cols.push_back("lambda_theta");
    }
    cols.push_back("lambda_y");
    cols.push_back("log_post");
    return cols;
  }

  double log_posterior_cached() const {
    const double n = data_.n();
    const auto& h = spec_.hyper;
    double lp = (h.a_y + 0.5 * n - 1.0) * std::log(state_.lambda_y) -
                state_.lambda_y * (h.b_y + 0.5 * ssr_);
    if (state_.xi) lp += *state_.xi - std::exp(*state_.xi);
    switch (spec_.variant) {
      case Variant::gp:
        lp += (h.a_lambda_theta + 0.5 * n - 1.0) * std::log(state_.lambda_theta) -
              state_.lambda_theta * (h.b_lambda_theta + 0.5 * quad_) +
              factors_.logdet_half_inv() +
              model::log_prior_nu(state_.nu, h.b_rho);
        break;
      case Variant::parametric_sqrt:
        break;  // flat beta prior
      case Variant::constant:
        lp += state_.w - std::exp(state_.w);
        break;
    }
    return lp;
  }

  void record_row(ChainTrace& trace, int row, int iteration) const {
    int j = 0;
    auto put = [&](double v) { trace.draws(row, j++) = v; };
    put(iteration);
    switch (spec_.variant) {
      case Variant::gp:
        for (Eigen::Index i = 0; i < state_.z.size(); ++i) put(state_.z(i));
        break;
      case Variant::parametric_sqrt:
        put(state_.beta0);
        put(state_.beta1);
        break;
      case Variant::constant:
        put(state_.w);
        break;
    }
    if (state_.xi) put(*state_.xi);
    if (spec_.variant == Variant::gp) {
      put(state_.nu);
      put(state_.lambda_theta);
    }
    put(state_.lambda_y);
    put(log_posterior_cached());
  }

  const ModelSpec& spec_;
  const FieldDataset& data_;
  Simulator& sim_;
  const ChainConfig& cfg_;
  int chain_index_;
  Rng rng_;
  std::vector<int> constraint_rows_;

  ChainState state_;
  gp::CorrFactors factors_;
  double ssr_ = 0.0;
  double quad_ = 0.0;

  std::vector<Block> blocks_;
  bool in_burn_tail_ = false;
  bool post_phase_ = false;
};

}  // namespace

ChainTrace run_chain(const ModelSpec& spec, const FieldDataset& data,
                     Simulator& sim, const ChainConfig& config,
                     int chain_index) {
  spec.validate();
  config.validate();
  require(chain_index >= 0, ErrorCode::invalid_argument,
          "chain_index must be non-negative");
  require(sim.dim_x() == data.dim_x(), ErrorCode::config,
          "simulator control-input dimension does not match the data");
  require(sim.n_params() == spec.n_params(), ErrorCode::config,
          "simulator parameter count does not match the model");
  Runner runner(spec, data, sim, config, chain_index);
  return runner.run();
}

TraceSet run_chains(const ModelSpec& spec, const FieldDataset& data,
                    const std::function<Simulator&(int)>& sim_for_chain,
                    const ChainConfig& config, bool parallel) {
  config.validate();
  TraceSet set;
  set.chains.resize(static_cast<size_t>(config.n_chains));

  std::vector<std::optional<Error>> errors(
      static_cast<size_t>(config.n_chains));
  auto work = [&](int c) {
    try {
      set.chains[static_cast<size_t>(c)] =
          run_chain(spec, data, sim_for_chain(c), config, c);
    } catch (const Error& e) {
      errors[static_cast<size_t>(c)] = e;
    } catch (const std::exception& e) {
      errors[static_cast<size_t>(c)] = Error(ErrorCode::runtime, e.what());
    }
  };

  if (parallel && config.n_chains > 1) {
    std::vector<std::thread> threads;
    threads.reserve(static_cast<size_t>(config.n_chains));
    for (int c = 0; c < config.n_chains; ++c) threads.emplace_back(work, c);
    for (auto& t : threads) t.join();
  } else {
    for (int c = 0; c < config.n_chains; ++c) work(c);
  }
  for (int c = 0; c < config.n_chains; ++c)
    if (const auto& e = errors[static_cast<size_t>(c)])
      throw Error(e->code(), "chain " + std::to_string(c) + " failed: " +
                                 e->what());

  set.columns = set.chains.front().columns;
  const bool can_rhat =
      config.n_chains >= 2 && config.n_recorded() >= 10;
  if (can_rhat) {
    for (const auto& name : set.columns) {
      if (name == "iteration") continue;
      std::vector<Eigen::VectorXd> series;
      series.reserve(set.chains.size());
      for (const auto& chain : set.chains) series.push_back(chain.series(name));
      set.rhat[name] = rhat(series);
    }
  }
  return set;
}

}  // namespace statecal::sampler
