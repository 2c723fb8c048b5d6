#pragma once

// Brute-force reference implementations used only by tests. None of these
// share code with the library routines they check.

#include "apdpro/problem.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <limits>
#include <optional>
#include <random>
#include <vector>

namespace apdpro::oracle {

/// Euclidean projection onto ball ∩ {u : u_j = 0 for masked j}, or nullopt
/// when the intersection is empty.
inline std::optional<Vector> project_face(const Vector& w, const std::vector<char>& zero,
                                          const Ball& ball) {
  Vector u = w;
  Vector c = ball.center;
  double dist2 = 0.0;
  for (Index j = 0; j < w.size(); ++j) {
    if (zero[static_cast<std::size_t>(j)]) {
      u[j] = 0.0;
      dist2 += c[j] * c[j];
      c[j] = 0.0;
    }
  }
  const double r2 = ball.radius * ball.radius - dist2;
  if (r2 < 0.0) return std::nullopt;
  const double r = std::sqrt(r2);
  const double d = (u - c).norm();
  if (d > r) u = c + (r / d) * (u - c);
  return u;
}

inline double prox_objective(const Vector& u, const Vector& v, double eta,
                             const BlockNormObjective& f) {
  return f.value(u) + (u - v).squaredNorm() / (2.0 * eta);
}

/// Grid scan of the ball's bounding box, then a shrinking pattern search
/// restricted to each face {blocks in Z are zero} of the block structure; the
/// best face wins. Inside a face the objective is smooth near its minimizer,
/// so the search does not stall on kinks where a zero block meets the sphere.
inline Vector scan_prox(const Vector& v, double eta, const BlockNormObjective& f, const Ball& ball,
                        double final_step = 1e-10) {
  const Index n = v.size();
  const auto& blocks = f.blocks();
  auto phi = [&](const Vector& u) { return prox_objective(u, v, eta, f); };

  const int per_dim = n <= 2 ? 41 : (n == 3 ? 15 : (n == 4 ? 9 : 7));
  Vector grid_best = ball.center;
  double grid_val = phi(grid_best);
  std::vector<int> idx(static_cast<std::size_t>(n), 0);
  const double h0 = 2.0 * ball.radius / (per_dim - 1);
  while (true) {
    Vector u(n);
    for (Index j = 0; j < n; ++j) {
      u[j] = ball.center[j] - ball.radius + h0 * idx[static_cast<std::size_t>(j)];
    }
    if (ball.contains(u)) {
      const double val = phi(u);
      if (val < grid_val) {
        grid_val = val;
        grid_best = u;
      }
    }
    Index j = 0;
    while (j < n && ++idx[static_cast<std::size_t>(j)] == per_dim) idx[static_cast<std::size_t>(j++)] = 0;
    if (j == n) break;
  }

  std::mt19937_64 rng(0x9e3779b97f4a7c15ULL);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Vector best = grid_best;
  double best_val = grid_val;
  const std::size_t num_blocks = blocks.size();
  for (std::size_t face = 0; face < (std::size_t{1} << num_blocks); ++face) {
    std::vector<char> zero(static_cast<std::size_t>(n), 0);
    for (std::size_t b = 0; b < num_blocks; ++b) {
      if (face & (std::size_t{1} << b)) {
        for (Index j = blocks[b].start; j < blocks[b].start + blocks[b].length; ++j) {
          zero[static_cast<std::size_t>(j)] = 1;
        }
      }
    }
    auto start = project_face(grid_best, zero, ball);
    if (!start) continue;
    Vector x = *start;
    double x_val = phi(x);
    auto try_move = [&](const Vector& cand) {
      const auto u = project_face(cand, zero, ball);
      if (!u) return false;
      const double val = phi(*u);
      if (val < x_val) {
        x_val = val;
        x = *u;
        return true;
      }
      return false;
    };
    double h = h0;
    while (h > final_step) {
      bool improved = false;
      for (Index i = 0; i < n; ++i) {
        if (zero[static_cast<std::size_t>(i)]) continue;
        for (double s : {1.0, -1.0}) {
          Vector cand = x;
          cand[i] += s * h;
          improved |= try_move(cand);
        }
      }
      for (int r = 0; r < 16; ++r) {
        Vector dir(n);
        for (Index j = 0; j < n; ++j) dir[j] = zero[static_cast<std::size_t>(j)] ? 0.0 : gauss(rng);
        const double norm = dir.norm();
        if (norm > 0.0) improved |= try_move(x + h * dir / norm);
      }
      if (!improved) h *= 0.5;
    }
    if (x_val < best_val) {
      best_val = x_val;
      best = x;
    }
  }
  return best;
}

/// Exact prox of a weighted l1 norm over a ball: on each sign pattern the
/// objective is a strongly convex quadratic, so the minimizer over the pattern's
/// face is a projection; the best face wins.
inline Vector enumerate_l1_prox(const Vector& v, double eta, const Vector& weights,
                                const Ball& ball) {
  const Index n = v.size();
  const BlockNormObjective f = BlockNormObjective::weighted_l1(weights);
  Index patterns = 1;
  for (Index j = 0; j < n; ++j) patterns *= 3;
  Vector best;
  double best_val = std::numeric_limits<double>::infinity();
  for (Index code = 0; code < patterns; ++code) {
    Index rest = code;
    std::vector<char> zero(static_cast<std::size_t>(n), 0);
    Vector w = v;
    for (Index j = 0; j < n; ++j) {
      const Index digit = rest % 3;
      rest /= 3;
      if (digit == 0) zero[static_cast<std::size_t>(j)] = 1;
      else w[j] -= eta * weights[j] * (digit == 1 ? 1.0 : -1.0);
    }
    const auto u = project_face(w, zero, ball);
    if (!u) continue;
    const double val = prox_objective(*u, v, eta, f);
    if (val < best_val) {
      best_val = val;
      best = *u;
    }
  }
  return best;
}

/// Projection onto {y >= 0, lower <= sum y <= upper} by enumerating which
/// coordinates are zero and whether the sum constraint is active.
inline Vector enumerate_slab_projection(const Vector& u, double lower, double upper) {
  const Index m = u.size();
  Vector best;
  double best_dist = std::numeric_limits<double>::infinity();
  const double tol = 1e-12 * std::max(1.0, upper);
  for (Index mask = 0; mask < (Index{1} << m); ++mask) {
    // mask bit set: coordinate is free (not forced to zero)
    Index free = 0;
    double free_sum = 0.0;
    for (Index j = 0; j < m; ++j) {
      if (mask & (Index{1} << j)) {
        ++free;
        free_sum += u[j];
      }
    }
    for (int sum_case = 0; sum_case < 3; ++sum_case) {
      Vector y = Vector::Zero(m);
      double shift = 0.0;
      if (sum_case > 0) {
        if (free == 0) continue;
        const double target = sum_case == 1 ? lower : upper;
        shift = (free_sum - target) / static_cast<double>(free);
      }
      for (Index j = 0; j < m; ++j) {
        if (mask & (Index{1} << j)) y[j] = u[j] - shift;
      }
      if ((y.array() < -tol).any()) continue;
      const double s = y.sum();
      if (s < lower - tol || s > upper + tol) continue;
      const double dist = (y - u).squaredNorm();
      if (dist < best_dist) {
        best_dist = dist;
        best = y.cwiseMax(0.0);
      }
    }
  }
  return best;
}

/// Q = D^{-1/2} (D - (1-alpha)/2 (D + A)) D^{-1/2}, assembled densely.
inline Matrix dense_ppr_q(const Matrix& adjacency, double alpha) {
  const Vector d = adjacency.rowwise().sum();
  const Matrix dm = d.asDiagonal();
  const Matrix dinv = d.cwiseSqrt().cwiseInverse().asDiagonal();
  return dinv * (dm - 0.5 * (1.0 - alpha) * (dm + adjacency)) * dinv;
}

inline std::pair<double, double> dense_extreme_eigenvalues(const Matrix& q) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(q);
  return {eig.eigenvalues().minCoeff(), eig.eigenvalues().maxCoeff()};
}

/// Central-difference Jacobian, n x m.
template <class G>
Matrix finite_difference_jacobian(const G& g, const Vector& x, double h = 1e-6) {
  const Vector g0 = g(x);
  Matrix jac(x.size(), g0.size());
  for (Index j = 0; j < x.size(); ++j) {
    Vector xp = x;
    Vector xm = x;
    xp[j] += h;
    xm[j] -= h;
    jac.row(j) = ((g(xp) - g(xm)) / (2.0 * h)).transpose();
  }
  return jac;
}

/// Least-squares slope of log(y) against log(x).
inline double loglog_slope(const std::vector<double>& xs, const std::vector<double>& ys) {
  const std::size_t n = xs.size();
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += std::log(xs[i]);
    my += std::log(ys[i]);
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = std::log(xs[i]) - mx;
    sxy += dx * (std::log(ys[i]) - my);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

inline Vector random_vector(std::mt19937_64& rng, Index n, double lo, double hi) {
  std::uniform_real_distribution<double> unif(lo, hi);
  Vector v(n);
  for (Index i = 0; i < n; ++i) v[i] = unif(rng);
  return v;
}

}  // namespace apdpro::oracle
