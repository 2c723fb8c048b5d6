#pragma once

// Accelerated primal-dual solvers for min f(x) s.t. G(x) <= 0 with strongly
// convex constraints:
//
//   apdpro       step sizes driven by a progressively estimated strong-convexity
//                bound rho_k, dual iterates kept in a cut set ||y||_1 mu_lb >= rho_k
//   rapdpro      apdpro restarted in epochs whose length follows rho^_k
//   msapd        multi-stage APD with constant steps per stage and a stage
//                length driven by rho_k (no dual cut)
//   apd          constant-step accelerated primal-dual baseline
//   apd_restart  apd restarted from its ergodic average every restart_period steps
//
// All variants share one iteration engine; apd is apdpro with the estimator off.

#include "apdpro/common.hpp"
#include "apdpro/estimator.hpp"
#include "apdpro/metrics.hpp"
#include "apdpro/problem.hpp"
#include "apdpro/prox.hpp"
#include "apdpro/spectral.hpp"

#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace apdpro {

enum class Variant { apdpro, rapdpro, msapd, apd, apd_restart };

inline std::string_view to_string(Variant v) {
  switch (v) {
    case Variant::apdpro: return "apdpro";
    case Variant::rapdpro: return "rapdpro";
    case Variant::msapd: return "msapd";
    case Variant::apd: return "apd";
    case Variant::apd_restart: return "apd_restart";
  }
  return "?";
}

inline Variant parse_variant(std::string_view name) {
  for (Variant v : {Variant::apdpro, Variant::rapdpro, Variant::msapd, Variant::apd,
                    Variant::apd_restart}) {
    if (to_string(v) == name) return v;
  }
  throw InvalidArgument("unknown solver variant '" + std::string(name) + "'");
}

/// Which primal point the metrics (and tolerance stop) look at.
enum class MetricIterate { automatic, last, ergodic };

inline MetricIterate parse_metric_iterate(std::string_view name) {
  if (name == "auto" || name == "automatic") return MetricIterate::automatic;
  if (name == "last") return MetricIterate::last;
  if (name == "ergodic") return MetricIterate::ergodic;
  throw InvalidArgument("unknown metric iterate '" + std::string(name) + "'");
}

enum class Termination {
  iterations,  ///< fixed iteration count reached (apdpro, apd, apd_restart)
  schedule,    ///< every epoch/stage of the restart schedule completed
  budget,      ///< safety cap on iterations hit before the schedule finished
  tolerance,   ///< early stop criterion met
};

inline std::string_view to_string(Termination t) {
  switch (t) {
    case Termination::iterations: return "iterations";
    case Termination::schedule: return "schedule";
    case Termination::budget: return "budget";
    case Termination::tolerance: return "tolerance";
  }
  return "?";
}

inline constexpr Index kUnboundedIters = std::numeric_limits<Index>::max();

struct SolverConfig {
  Variant variant = Variant::apdpro;
  /// Initial primal step. Defaults per variant when unset.
  std::optional<double> tau0;
  /// Initial dual step (sigma-bar for rapdpro, sigma-tilde for msapd).
  std::optional<double> sigma0;
  double rho0 = 0.0;
  /// When false rho stays at rho0 and no Improve step runs.
  bool estimate = true;
  /// Total inner-iteration budget across all epochs.
  Index max_iters = 1000;
  /// Per-epoch cap on inner iterations; 0 means only max_iters applies.
  Index max_epoch_iters = 0;
  /// Last epoch/stage index S (epochs 0..S run).
  Index max_epochs = 20;
  double nu0 = 0.25;
  double delta = 0.5;
  /// apd_restart period; 0 disables restarts.
  Index restart_period = 0;
  /// msapd: switch stages on a fixed schedule instead of the rho-driven budget.
  bool msapd_forced_schedule = false;
  Index msapd_stage_iters = 100;
  /// Early-stop tolerance; 0 disables it.
  double tolerance = 0.0;
  MetricIterate metric = MetricIterate::automatic;
};

struct SolverState {
  Vector x_prev;
  Vector x;
  Vector y;
  Vector x_bar;
  Vector y_bar;   ///< T^-1 sum_{s<k} t_s y_s (y when T = 0)
  double T = 0.0;
  double t = 0.0; ///< weight t_{k-1} of the last averaged iterate
  double tau = 0.0;
  double sigma = 0.0;
  double tau_prev = 0.0;
  double sigma_prev = 0.0;
  double tau0 = 0.0;   ///< epoch initial steps
  double sigma0 = 0.0;
  double delta_xy = 0.0;
  RhoEstimate rho_est;
  Index k = 0;     ///< inner index within the epoch
  Index s = 0;     ///< epoch / stage
  Index iter = 0;  ///< global iteration count
};

struct RunResult {
  Vector x;
  Vector x_bar;
  Vector y;
  Vector y_bar;
  std::vector<IterateRecord> trace;
  Termination termination = Termination::iterations;
  Index epochs_executed = 0;
  std::vector<Index> epoch_lengths;  ///< inner iterations run per epoch
  std::vector<Vector> epoch_starts;  ///< primal point each epoch started from
  MetricIterate metric = MetricIterate::last;
  double final_rho = 0.0;

  const Vector& solution() const { return metric == MetricIterate::ergodic ? x_bar : x; }
  const Vector& dual_solution() const { return metric == MetricIterate::ergodic ? y_bar : y; }
};

struct RunOptions {
  const MetricReference* reference = nullptr;
  std::function<void(const SolverState&)> observer;
  bool record_trace = true;
};

struct StepSizes {
  double tau = 0.0;
  double sigma = 0.0;
  double t = 0.0;
};

/// tau' = tau / sqrt(1 + rho tau), sigma' = sigma tau / tau', t' = sigma' / sigma0.
inline StepSizes stepsize_update(double tau, double sigma, double sigma0, double rho_next) {
  require(tau > 0.0 && sigma > 0.0 && sigma0 > 0.0 && rho_next >= 0.0,
          "stepsize_update: invalid inputs");
  StepSizes out;
  if (rho_next == 0.0) {
    out.tau = tau;
    out.sigma = sigma;
  } else {
    out.tau = tau / std::sqrt(1.0 + rho_next * tau);
    out.sigma = sigma * tau / out.tau;
  }
  out.t = out.sigma / sigma0;
  return out;
}

namespace detail {

inline Index ceil_to_index(double value) {
  if (!(value < 9.0e18)) return kUnboundedIters;
  return static_cast<Index>(std::ceil(value));
}

}  // namespace detail

/// Epoch length of the restarted scheme for a given rate coefficient.
inline Index restart_epoch_budget(double rho_hat, Index s, double tau0, double sigma0, double diam_x,
                                  double diam_y) {
  if (!(rho_hat > 0.0)) return kUnboundedIters;
  const double first = 6.0 / (rho_hat * tau0);
  const double second = std::pow(std::sqrt(2.0), static_cast<double>(s)) * 3.0 * std::sqrt(2.0) *
                        diam_y / (rho_hat * diam_x * std::sqrt(tau0 * sigma0));
  return detail::ceil_to_index(std::max(first, second));
}

struct EpochBudget {
  Index n = kUnboundedIters;
  double rho_hat_new = 0.0;
};

/// k counts the inner iterations completed so far in the epoch (k >= 1); the
/// first one starts the rho^ sequence, later ones apply the recursion.
inline EpochBudget terminate_iter(double rho_hat_old, double rho, Index s, Index k, double tau0,
                                  double sigma0, double diam_x, double diam_y) {
  require(k >= 1 && tau0 > 0.0 && sigma0 > 0.0, "terminate_iter: invalid inputs");
  EpochBudget out;
  out.rho_hat_new = k == 1 ? rho_hat_initial(rho, tau0) : rho_hat_next(rho_hat_old, rho, k - 1);
  out.n = restart_epoch_budget(out.rho_hat_new, s, tau0, sigma0, diam_x, diam_y);
  return out;
}

/// Stage length of the multi-stage scheme.
inline Index msapd_stage_budget(double rho, Index s, double tau0, double sigma0, double diam_x,
                                double diam_y) {
  if (!(rho > 0.0)) return kUnboundedIters;
  const double first = 4.0 / (rho * tau0);
  const double second = diam_y * diam_y / (rho * sigma0 * diam_x * diam_x) *
                        std::pow(2.0, static_cast<double>(s + 1));
  return detail::ceil_to_index(std::max(first, second));
}

/// Stage step sizes of the multi-stage scheme.
inline StepSizes msapd_stage_steps(double lip_coupled, double lip_g, double sigma_tilde, Index s) {
  const double sigma = sigma_tilde * std::pow(2.0, 0.5 * static_cast<double>(s));
  return StepSizes{1.0 / (lip_coupled + lip_g * lip_g * sigma), sigma, 1.0};
}

/// Initial steps with tau0^-1 = L_XY + L_G^2 sigma0 and sigma0 balancing the
/// two terms unless overridden.
inline StepSizes default_steps(const ConstrainedProblem& problem, const ProblemConstants& c,
                               const SolverConfig& cfg) {
  const double lg2 = problem.lip_constraints * problem.lip_constraints;
  StepSizes st;
  switch (cfg.variant) {
    case Variant::rapdpro: {
      require(cfg.nu0 > 0.0 && cfg.nu0 < 1.0 && cfg.delta > 0.0 && cfg.delta < 1.0,
              "rapdpro: nu0 and delta must lie in (0, 1)");
      st.sigma = cfg.sigma0.value_or(c.lip_coupled > 0.0 ? cfg.delta * c.lip_coupled / lg2
                                                         : 1.0 / problem.lip_constraints);
      const double bound = (1.0 - cfg.nu0) / (c.lip_coupled + lg2 * st.sigma / cfg.delta);
      st.tau = cfg.tau0.value_or(bound);
      require(st.tau <= bound * (1.0 + 1e-12),
              "rapdpro: tau0 exceeds (1 - nu0)(L_XY + L_G^2 sigma/delta)^-1");
      break;
    }
    default: {
      st.sigma = cfg.sigma0.value_or(c.lip_coupled > 0.0 ? c.lip_coupled / lg2
                                                         : 1.0 / problem.lip_constraints);
      const double bound = 1.0 / (c.lip_coupled + lg2 * st.sigma);
      st.tau = cfg.tau0.value_or(bound);
      require(st.tau <= bound * (1.0 + 1e-12),
              "step sizes violate tau0^-1 >= L_XY + L_G^2 sigma0");
      break;
    }
  }
  require(st.tau > 0.0 && st.sigma > 0.0, "step sizes must be positive");
  st.t = 1.0;
  return st;
}

/// Projection of 0 onto X and of the all-ones vector onto the dual set.
inline std::pair<Vector, Vector> default_start(const ConstrainedProblem& problem,
                                               const ProblemConstants& c) {
  Vector x0 = Vector::Zero(problem.dimension());
  const Vector d = x0 - c.ball.center;
  const double dn = d.norm();
  if (dn > c.ball.radius) x0 = c.ball.center + d * (c.ball.radius / dn);
  const Vector y0 = project_dual_set(Vector::Ones(problem.num_constraints()),
                                     DualSlab{0.0, c.c_bar, problem.num_constraints()});
  return {x0, y0};
}

namespace detail {

struct StepRule {
  bool cut = true;         ///< project onto the rho cut of the dual set
  bool adapt = true;       ///< shrink tau / grow sigma with rho
  bool estimate = true;    ///< run Improve
  bool stage_beta = false; ///< msapd radii: beta = D_X^2/2, beta_bar = Delta/k
};

class Engine {
 public:
  Engine(const ConstrainedProblem& problem, const ProblemConstants& constants,
         const SolverConfig& cfg, const RunOptions& options, MetricIterate metric)
      : p_(problem), c_(constants), cfg_(cfg), opt_(options), metric_(metric),
        est_{problem.subgradient_lb, problem.lip_jacobian, constants.mu_lb},
        start_(std::chrono::steady_clock::now()) {
    problem.validate();
    st_.rho_est.rho = cfg.rho0;
    require(cfg.rho0 >= 0.0, "rho0 must be nonnegative");
    require(cfg.max_iters >= 0, "max_iters must be nonnegative");
  }

  SolverState& state() { return st_; }
  const SolverState& state() const { return st_; }
  RunResult& result() { return result_; }

  void begin_epoch(const Vector& x0, const Vector& y0, double tau0, double sigma0, double delta_xy,
                   Index epoch) {
    require_same_size(x0.size(), p_.dimension(), "initial x");
    require_same_size(y0.size(), p_.num_constraints(), "initial y");
    st_.x_prev = x0;
    st_.x = x0;
    st_.y = y0;
    st_.x_bar = x0;
    st_.y_bar = y0;
    y_sum_ = Vector::Zero(y0.size());
    st_.T = 0.0;
    st_.t = 0.0;
    st_.tau = st_.tau_prev = st_.tau0 = tau0;
    st_.sigma = st_.sigma_prev = st_.sigma0 = sigma0;
    st_.delta_xy = delta_xy;
    st_.k = 0;
    st_.s = epoch;
    st_.rho_est.rho_hat = 1.0;
    st_.rho_est.k = 0;
    p_.constraints->evaluate(st_.x, g_x_, jac_x_);
    g_prev_ = g_x_;
    result_.epoch_starts.push_back(x0);
    result_.epoch_lengths.push_back(0);
    result_.epochs_executed = static_cast<Index>(result_.epoch_lengths.size());
  }

  /// One primal-dual iteration; returns true when the tolerance stop fired.
  bool step(const StepRule& rule) {
    const Index k = st_.k;
    const Index m = p_.num_constraints();
    const double rho = st_.rho_est.rho;

    const double lower = rule.cut ? cap_rho(rho, c_.mu_lb, c_.c_bar) / c_.mu_lb : 0.0;
    const DualSlab slab{lower, c_.c_bar, m};

    const double ratio = st_.sigma_prev / st_.sigma;
    const Vector z = (1.0 + ratio) * g_x_ - ratio * g_prev_;
    Vector y_next = project_dual_set(st_.y + st_.sigma * z, slab);
    Vector x_next = prox_f_over_ball(st_.x - st_.tau * (jac_x_ * y_next), st_.tau, p_.objective,
                                     c_.ball);

    // Ergodic averages: x_bar over x_1..x_k, y_bar over y_0..y_{k-1}.
    const double t = st_.sigma / st_.sigma0;
    const double t_prev_total = st_.T;
    const Vector x_bar_k = st_.x_bar;
    y_sum_ += t * st_.y;
    st_.x_bar = (st_.T * st_.x_bar + t * x_next) / (st_.T + t);
    st_.T += t;
    st_.t = t;
    st_.y_bar = y_sum_ / st_.T;

    double rho_next = rho;
    if (rule.estimate) {
      const double beta = rule.stage_beta
                              ? 0.5 * c_.diam_primal * c_.diam_primal
                              : st_.sigma0 * st_.tau_prev * st_.delta_xy / st_.sigma_prev;
      // With nothing averaged yet the second bound is vacuous.
      const double beta_bar = t_prev_total > 0.0 ? st_.delta_xy / t_prev_total
                                                 : std::numeric_limits<double>::infinity();
      const double gn_x = spectral_norm(jac_x_);
      const double gn_bar = t_prev_total > 0.0 ? spectral_norm(p_.jacobian(x_bar_k)) : 0.0;
      rho_next = cap_rho(improve(gn_x, gn_bar, beta, beta_bar, rho, est_), c_.mu_lb, c_.c_bar);
      rho_next = std::max(rho_next, rho);
    }
    st_.rho_est.rho_hat = k == 0 ? rho_hat_initial(rho_next, st_.tau0)
                                 : rho_hat_next(st_.rho_est.rho_hat, rho_next, k);
    st_.rho_est.k = k + 1;

    StepSizes next{st_.tau, st_.sigma, t};
    if (rule.adapt) next = stepsize_update(st_.tau, st_.sigma, st_.sigma0, rho_next);

    st_.tau_prev = st_.tau;
    st_.sigma_prev = st_.sigma;
    st_.tau = next.tau;
    st_.sigma = next.sigma;
    st_.x_prev.swap(st_.x);
    st_.x.swap(x_next);
    st_.y.swap(y_next);
    g_prev_.swap(g_x_);
    p_.constraints->evaluate(st_.x, g_x_, jac_x_);
    st_.rho_est.rho = rho_next;
    ++st_.k;
    ++st_.iter;
    ++result_.epoch_lengths.back();

    if (!c_.ball.contains(st_.x, 1e-9 * std::max(1.0, c_.ball.radius))) {
      throw NumericalFailure("primal iterate left the feasible ball");
    }

    record();
    if (opt_.observer) opt_.observer(st_);
    return cfg_.tolerance > 0.0 && tolerance_met();
  }

  /// Restart the averages from the current ergodic point (apd_restart).
  void restart_from_average(Index epoch) {
    const Vector x0 = st_.x_bar;
    const Vector y0 = st_.T > 0.0 ? st_.y_bar : st_.y;
    begin_epoch(x0, y0, st_.tau0, st_.sigma0, st_.delta_xy, epoch);
  }

  RunResult finish(Termination why) {
    result_.x = st_.x;
    result_.x_bar = st_.x_bar;
    result_.y = st_.y;
    result_.y_bar = st_.T > 0.0 ? st_.y_bar : st_.y;
    result_.termination = why;
    result_.metric = metric_;
    result_.final_rho = st_.rho_est.rho;
    return std::move(result_);
  }

  const Vector& metric_x() const { return metric_ == MetricIterate::ergodic ? st_.x_bar : st_.x; }
  const Vector& metric_y() const {
    return metric_ == MetricIterate::ergodic && st_.T > 0.0 ? st_.y_bar : st_.y;
  }

 private:
  void record() {
    if (!opt_.record_trace) return;
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    RecordInputs in{st_.iter, st_.s, st_.rho_est.rho, st_.tau, st_.sigma, elapsed};
    const Vector* g = metric_ == MetricIterate::last ? &g_x_ : nullptr;
    result_.trace.push_back(compute_metrics(p_, metric_x(), in, opt_.reference, g));
  }

  bool tolerance_met() const {
    if (opt_.reference != nullptr) {
      const Vector& xm = metric_x();
      const double gap = relative_gap(p_.objective.value(xm), opt_.reference->f);
      const double feas = p_.g(xm).cwiseMax(0.0).norm();
      return std::max(gap, feas) <= cfg_.tolerance;
    }
    return kkt_residual(p_, metric_x(), metric_y()).max() <= cfg_.tolerance;
  }

  const ConstrainedProblem& p_;
  const ProblemConstants& c_;
  const SolverConfig& cfg_;
  const RunOptions& opt_;
  MetricIterate metric_;
  EstimatorConstants est_;
  std::chrono::steady_clock::time_point start_;
  SolverState st_;
  RunResult result_;
  Vector y_sum_;
  Vector g_x_;
  Vector g_prev_;
  Matrix jac_x_;
};

inline MetricIterate resolve_metric(const SolverConfig& cfg) {
  if (cfg.metric != MetricIterate::automatic) return cfg.metric;
  switch (cfg.variant) {
    case Variant::apdpro:
    case Variant::rapdpro: return MetricIterate::last;
    default: return MetricIterate::ergodic;
  }
}

inline double half_delta_xy(double tau0, double sigma0, const ProblemConstants& c) {
  return c.diam_primal * c.diam_primal / (2.0 * tau0) + c.diam_dual * c.diam_dual / (2.0 * sigma0);
}

}  // namespace detail

/// Single run of the estimator-driven method for max_iters iterations.
inline RunResult apdpro(const ConstrainedProblem& problem, const ProblemConstants& constants,
                        const SolverConfig& cfg, const Vector& x0, const Vector& y0,
                        const RunOptions& options = {}) {
  SolverConfig local = cfg;
  local.variant = Variant::apdpro;
  const StepSizes steps = default_steps(problem, constants, local);
  detail::Engine engine(problem, constants, local, options, detail::resolve_metric(local));
  engine.begin_epoch(x0, y0, steps.tau, steps.sigma,
                     detail::half_delta_xy(steps.tau, steps.sigma, constants), 0);
  const detail::StepRule rule{true, true, local.estimate, false};
  for (Index i = 0; i < local.max_iters; ++i) {
    if (engine.step(rule)) return engine.finish(Termination::tolerance);
  }
  return engine.finish(Termination::iterations);
}

/// Constant-step APD: the same iteration with rho fixed at zero.
inline RunResult apd_baseline(const ConstrainedProblem& problem, const ProblemConstants& constants,
                              const SolverConfig& cfg, const Vector& x0, const Vector& y0,
                              const RunOptions& options = {}) {
  SolverConfig local = cfg;
  local.estimate = false;
  local.rho0 = 0.0;
  if (local.variant != Variant::apd_restart) local.variant = Variant::apd;
  const bool restarting = local.variant == Variant::apd_restart && local.restart_period > 0;
  const StepSizes steps = default_steps(problem, constants, local);
  detail::Engine engine(problem, constants, local, options, detail::resolve_metric(local));
  engine.begin_epoch(x0, y0, steps.tau, steps.sigma,
                     detail::half_delta_xy(steps.tau, steps.sigma, constants), 0);
  const detail::StepRule rule{true, true, false, false};
  Index epoch = 0;
  for (Index i = 0; i < local.max_iters; ++i) {
    if (restarting && engine.state().k >= local.restart_period) {
      engine.restart_from_average(++epoch);
    }
    if (engine.step(rule)) return engine.finish(Termination::tolerance);
  }
  return engine.finish(Termination::iterations);
}

/// Restarted scheme: epochs s = 0..S, each reset to (tau-bar, sigma-bar) and
/// warm-started from the previous epoch's last iterate; an epoch ends once its
/// inner count reaches the rho^-driven budget.
inline RunResult rapdpro(const ConstrainedProblem& problem, const ProblemConstants& constants,
                         const SolverConfig& cfg, const Vector& x0, const Vector& y0,
                         const RunOptions& options = {}) {
  SolverConfig local = cfg;
  local.variant = Variant::rapdpro;
  const StepSizes steps = default_steps(problem, constants, local);
  // The restarted scheme weights the primal term by 1/tau rather than 1/(2 tau).
  const double delta_xy = constants.diam_primal * constants.diam_primal / steps.tau +
                          constants.diam_dual * constants.diam_dual / (2.0 * steps.sigma);
  detail::Engine engine(problem, constants, local, options, detail::resolve_metric(local));
  const detail::StepRule rule{true, true, local.estimate, false};

  Vector x = x0;
  Vector y = y0;
  for (Index s = 0; s <= local.max_epochs; ++s) {
    engine.begin_epoch(x, y, steps.tau, steps.sigma, delta_xy, s);
    Index budget = kUnboundedIters;
    double rho_hat = 1.0;
    while (engine.state().k < budget) {
      if (engine.state().iter >= local.max_iters) return engine.finish(Termination::budget);
      if (local.max_epoch_iters > 0 && engine.state().k >= local.max_epoch_iters) {
        return engine.finish(Termination::budget);
      }
      if (engine.step(rule)) return engine.finish(Termination::tolerance);
      const EpochBudget next =
          terminate_iter(rho_hat, engine.state().rho_est.rho, s, engine.state().k, steps.tau,
                         steps.sigma, constants.diam_primal, constants.diam_dual);
      rho_hat = next.rho_hat_new;
      budget = next.n;
    }
    x = engine.state().x;
    y = engine.state().y;
  }
  return engine.finish(Termination::schedule);
}

/// Multi-stage scheme: stage s runs constant-step APD with
/// sigma = sigma-tilde 2^{s/2}, tau = (L_XY + L_G^2 sigma)^-1 and hands its
/// ergodic average to the next stage.
inline RunResult msapd(const ConstrainedProblem& problem, const ProblemConstants& constants,
                       const SolverConfig& cfg, const Vector& x0, const Vector& y0,
                       const RunOptions& options = {}) {
  SolverConfig local = cfg;
  local.variant = Variant::msapd;
  const double lg = problem.lip_constraints;
  const double sigma_tilde = local.sigma0.value_or(
      constants.lip_coupled > 0.0 ? constants.lip_coupled / (lg * lg) : 1.0 / lg);
  require(sigma_tilde > 0.0, "msapd: sigma must be positive");
  require(!local.msapd_forced_schedule || local.msapd_stage_iters > 0,
          "msapd: forced schedule needs a positive stage length");
  detail::Engine engine(problem, constants, local, options, detail::resolve_metric(local));
  const detail::StepRule rule{false, false, local.estimate, true};
  const StepSizes stage0 = msapd_stage_steps(constants.lip_coupled, lg, sigma_tilde, 0);
  const double tau_first = local.tau0.value_or(stage0.tau);
  require(tau_first <= stage0.tau * (1.0 + 1e-12),
          "msapd: tau0 violates tau0^-1 >= L_XY + L_G^2 sigma0");

  Vector x = x0;
  Vector y = y0;
  double forced_length = static_cast<double>(local.msapd_stage_iters);
  for (Index s = 0; s <= local.max_epochs; ++s) {
    StepSizes steps = msapd_stage_steps(constants.lip_coupled, lg, sigma_tilde, s);
    if (local.msapd_forced_schedule) {
      const double scale = std::pow(std::sqrt(2.0), static_cast<double>(s));
      steps.tau = tau_first / scale;
      steps.sigma = sigma_tilde * scale;
    } else if (s == 0) {
      steps.tau = tau_first;
    }
    engine.begin_epoch(x, y, steps.tau, steps.sigma,
                       detail::half_delta_xy(steps.tau, steps.sigma, constants), s);
    Index budget = local.msapd_forced_schedule ? detail::ceil_to_index(forced_length - 1e-9)
                                               : kUnboundedIters;
    while (engine.state().k < budget) {
      if (engine.state().iter >= local.max_iters) return engine.finish(Termination::budget);
      if (local.max_epoch_iters > 0 && engine.state().k >= local.max_epoch_iters) {
        return engine.finish(Termination::budget);
      }
      if (engine.step(rule)) return engine.finish(Termination::tolerance);
      if (!local.msapd_forced_schedule) {
        budget = msapd_stage_budget(engine.state().rho_est.rho, s, steps.tau, steps.sigma,
                                    constants.diam_primal, constants.diam_dual);
      }
    }
    forced_length *= std::sqrt(2.0);
    x = engine.state().x_bar;
    y = engine.state().y_bar;
  }
  return engine.finish(Termination::schedule);
}

/// Dispatch on cfg.variant.
inline RunResult solve(const ConstrainedProblem& problem, const ProblemConstants& constants,
                       const SolverConfig& cfg, const Vector& x0, const Vector& y0,
                       const RunOptions& options = {}) {
  switch (cfg.variant) {
    case Variant::apdpro: return apdpro(problem, constants, cfg, x0, y0, options);
    case Variant::rapdpro: return rapdpro(problem, constants, cfg, x0, y0, options);
    case Variant::msapd: return msapd(problem, constants, cfg, x0, y0, options);
    case Variant::apd:
    case Variant::apd_restart: return apd_baseline(problem, constants, cfg, x0, y0, options);
  }
  throw InvalidArgument("solve: unknown variant");
}

}  // namespace apdpro
