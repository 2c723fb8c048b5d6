#pragma once

// Exact proximal and projection oracles used by the primal-dual solvers.

#include "apdpro/common.hpp"
#include "apdpro/problem.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <vector>

namespace apdpro {

/// Prox of eta * f: per block x_(i) = max(0, 1 - eta p_i / ||v_(i)||) v_(i).
inline Vector block_soft_threshold(const Vector& v, const BlockNormObjective& objective, double eta) {
  require(eta > 0.0, "block_soft_threshold: step must be positive");
  require_same_size(v.size(), objective.dimension(), "block_soft_threshold");
  Vector out(v.size());
  const auto& blocks = objective.blocks();
  const Vector& p = objective.weights();
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    const auto vb = v.segment(blocks[i].start, blocks[i].length);
    auto ob = out.segment(blocks[i].start, blocks[i].length);
    const double norm = vb.norm();
    const double shrink = eta * p[static_cast<Index>(i)];
    if (norm <= shrink || norm == 0.0) {
      ob.setZero();
    } else {
      ob = (1.0 - shrink / norm) * vb;
    }
  }
  return out;
}

namespace detail {

/// Minimizer of f(u) + ||u - v||^2/(2 eta) + lambda/2 ||u - c||^2.
inline Vector ball_penalized_prox(const Vector& v, double eta, const BlockNormObjective& objective,
                                  const Vector& center, double lambda) {
  const double inv = 1.0 / eta + lambda;
  const Vector w = (v / eta + lambda * center) / inv;
  return block_soft_threshold(w, objective, 1.0 / inv);
}

}  // namespace detail

/// argmin_{||u - center|| <= radius} f(u) + ||u - v||^2 / (2 eta).
///
/// The ball enters through a scalar multiplier lambda >= 0. When the free prox
/// lands outside the ball, lambda is bracketed by doubling and refined by
/// bisection on the radius residual ||u(lambda) - center|| - radius. The
/// returned point is taken from the feasible end of the bracket.
inline Vector prox_f_over_ball(const Vector& v, double eta, const BlockNormObjective& objective,
                               const Ball& ball) {
  require(eta > 0.0, "prox_f_over_ball: step must be positive");
  require(ball.radius > 0.0, "prox_f_over_ball: radius must be positive");
  require_same_size(v.size(), objective.dimension(), "prox_f_over_ball");
  require_same_size(ball.center.size(), objective.dimension(), "prox_f_over_ball center");

  auto residual_at = [&](double lambda, Vector& u) {
    u = detail::ball_penalized_prox(v, eta, objective, ball.center, lambda);
    return (u - ball.center).norm() - ball.radius;
  };

  Vector u_lo;
  if (residual_at(0.0, u_lo) <= 0.0) return u_lo;

  constexpr double kTol = 1e-12;
  constexpr int kMaxDoublings = 200;
  double lo = 0.0;
  double hi = 1.0 / eta;
  Vector u_hi;
  double res_hi = residual_at(hi, u_hi);
  int doublings = 0;
  while (res_hi > 0.0) {
    if (++doublings > kMaxDoublings) {
      throw NumericalFailure("prox_f_over_ball: could not bracket the ball multiplier");
    }
    lo = hi;
    hi *= 2.0;
    res_hi = residual_at(hi, u_hi);
  }

  Vector u_mid;
  for (int it = 0; it < 400 && res_hi < -kTol; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (!(mid > lo && mid < hi)) break;
    const double res_mid = residual_at(mid, u_mid);
    if (res_mid > 0.0) {
      lo = mid;
    } else {
      hi = mid;
      res_hi = res_mid;
      u_hi.swap(u_mid);
    }
  }
  return u_hi;
}

/// Dual feasible set cut away from the origin:
/// { y >= 0 : lower <= ||y||_1 <= upper }.
struct DualSlab {
  double lower = 0.0;
  double upper = 0.0;
  Index dimension = 1;
};

namespace detail {

/// Shift nu with sum_i max(u_i - nu, 0) = target for target > 0.
inline double simplex_shift(const Vector& u, double target) {
  std::vector<double> sorted(u.data(), u.data() + u.size());
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  double cumulative = 0.0;
  double nu = 0.0;
  for (std::size_t j = 0; j < sorted.size(); ++j) {
    cumulative += sorted[j];
    const double candidate = (cumulative - target) / static_cast<double>(j + 1);
    // Coordinates 0..j stay positive iff sorted[j] > candidate.
    if (sorted[j] > candidate) nu = candidate;
  }
  return nu;
}

}  // namespace detail

/// Euclidean projection onto the dual slab.
///
/// y(nu) = [u - nu]_+ with nu = 0 if sum [u]_+ already lies in the slab,
/// otherwise nu solves sum y(nu) = upper (nu > 0) or = lower (nu < 0).
inline Vector project_dual_set(const Vector& u, const DualSlab& slab) {
  require_same_size(u.size(), slab.dimension, "project_dual_set");
  if (slab.lower > slab.upper) {
    throw InfeasibleCut("project_dual_set: empty dual set (lower " + std::to_string(slab.lower) +
                        " > upper " + std::to_string(slab.upper) + ")");
  }
  require(slab.lower >= 0.0, "project_dual_set: lower bound must be nonnegative");

  Vector y = u.cwiseMax(0.0);
  const double s = y.sum();
  if (s >= slab.lower && s <= slab.upper) return y;

  const double target = s > slab.upper ? slab.upper : slab.lower;
  if (target <= 0.0) return Vector::Zero(u.size());
  const double nu = detail::simplex_shift(u, target);
  return (u.array() - nu).cwiseMax(0.0).matrix();
}

}  // namespace apdpro
