#pragma once

// Progressive strong-convexity estimation. Both h-bounds are lower bounds on
// ||y*||_1 derived from an iterate known to be close to x*; mu_lb times the
// larger of them lower-bounds the strong convexity (y*)'mu of the Lagrangian.

#include "apdpro/common.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace apdpro {

struct RhoEstimate {
  double rho = 0.0;      ///< current lower bound rho_k
  double rho_hat = 0.0;  ///< rate coefficient rho^_k
  Index k = 0;
};

struct EstimatorConstants {
  double r = 0.0;       ///< subgradient lower bound at x*
  double lip_x = 0.0;   ///< L_X
  double mu_lb = 0.0;   ///< min_i mu_i
};

/// Bound valid when ||x^ - x*||^2 <= 2 beta.
inline double h1(double grad_norm, double beta, double r, double lip_x) {
  require(grad_norm >= 0.0 && beta >= 0.0 && lip_x >= 0.0 && r > 0.0, "h1: invalid inputs");
  if (std::isinf(beta)) return 0.0;
  const double denom = grad_norm + lip_x * std::sqrt(2.0 * beta);
  require(denom > 0.0, "h1: zero denominator");
  return r / denom;
}

/// Bound valid when (y*)'mu ||x^ - x*||^2 <= 2 beta.
inline double h2(double grad_norm, double beta, double r, double lip_x, double mu_lb) {
  require(grad_norm >= 0.0 && beta >= 0.0 && lip_x >= 0.0, "h2: invalid inputs");
  require(r > 0.0 && mu_lb > 0.0, "h2: r and mu_lb must be positive");
  if (std::isinf(beta)) return 0.0;
  const double a = (lip_x / r) * std::sqrt(beta / (2.0 * mu_lb));
  const double b = std::sqrt(lip_x * lip_x * beta / (2.0 * mu_lb * r * r) + grad_norm / r);
  const double s = a + b;
  require(s > 0.0, "h2: zero denominator");
  return 1.0 / (s * s);
}

/// rho_new = max(rho_old, mu_lb * max(h1(x, beta), h2(x_bar, beta_bar))).
/// An infinite beta_bar (empty average) disables the h2 term.
inline double improve(double grad_norm_at_x, double grad_norm_at_xbar, double beta, double beta_bar,
                      double rho_old, const EstimatorConstants& c) {
  require(rho_old >= 0.0, "improve: rho_old must be nonnegative");
  const double b1 = h1(grad_norm_at_x, beta, c.r, c.lip_x);
  const double b2 = h2(grad_norm_at_xbar, beta_bar, c.r, c.lip_x, c.mu_lb);
  return std::max(rho_old, c.mu_lb * std::max(b1, b2));
}

/// rho^_1 = 3 sqrt(rho_1 / tau0).
inline double rho_hat_initial(double rho, double tau0) {
  require(rho >= 0.0 && tau0 > 0.0, "rho_hat_initial: invalid inputs");
  return 3.0 * std::sqrt(rho / tau0);
}

/// rho^_{k+1} = sqrt(rho^_k^2 k^2 + 3 rho_{k+1} rho^_k k) / (k + 1), for k >= 1.
inline double rho_hat_next(double rho_hat_old, double rho, Index k) {
  require(k >= 1 && rho_hat_old >= 0.0 && rho >= 0.0, "rho_hat_next: invalid inputs");
  const double kk = static_cast<double>(k);
  return std::sqrt(rho_hat_old * rho_hat_old * kk * kk + 3.0 * rho * rho_hat_old * kk) / (kk + 1.0);
}

/// Two-branch update as used by the restarted scheme: k == 1 starts the
/// sequence (rho_hat_old ignored), k > 1 applies the recursion at index k.
inline double rho_hat_update(double rho_hat_old, double rho, Index k, double tau0) {
  require(k >= 1, "rho_hat_update: k must be at least 1");
  if (k == 1) return rho_hat_initial(rho, tau0);
  return rho_hat_next(rho_hat_old, rho, k);
}

/// rho never exceeds mu_lb * c_bar, otherwise the dual cut would be empty.
inline double cap_rho(double rho, double mu_lb, double c_bar) {
  return std::min(rho, mu_lb * c_bar * (1.0 - 1e-12));
}

}  // namespace apdpro
