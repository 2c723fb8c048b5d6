#pragma once

#include "apdpro/common.hpp"

#include <cmath>
#include <functional>
#include <random>

namespace apdpro {

using LinearMap = std::function<Vector(const Vector&)>;

struct PowerIterationResult {
  double eigenvalue = 0.0;
  Vector eigenvector;
  int iterations = 0;
  bool converged = false;
};

/// Deterministic unit start vector for power iterations.
inline Vector power_iteration_start(Index n, std::uint64_t seed = 0x5eed5eedULL) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.5, 1.5);
  Vector v(n);
  for (Index i = 0; i < n; ++i) v[i] = unif(rng);
  return v / v.norm();
}

/// Largest eigenvalue of a symmetric positive semidefinite operator.
///
/// Stops once the eigen-residual ||Av - lv|| drops below tol * max(1, l) or,
/// for operators that are numerically zero, once ||Av|| <= tol.
inline PowerIterationResult power_iteration(const LinearMap& apply, Index n, double tol,
                                            int max_iterations) {
  require(n > 0, "power_iteration: empty operator");
  PowerIterationResult out;
  Vector v = power_iteration_start(n);
  for (int it = 1; it <= max_iterations; ++it) {
    Vector w = apply(v);
    const double lambda = v.dot(w);
    const double wn = w.norm();
    out.iterations = it;
    out.eigenvalue = lambda;
    if (wn <= tol) {
      out.eigenvalue = 0.0;
      out.eigenvector = v;
      out.converged = true;
      return out;
    }
    const double residual = (w - lambda * v).norm();
    v = w / wn;
    if (residual <= tol * std::max(1.0, std::abs(lambda))) {
      out.eigenvector = v;
      out.converged = true;
      return out;
    }
  }
  out.eigenvector = v;
  return out;
}

/// Spectral norm of an n x m matrix. Exact for a single column; otherwise
/// power iteration on the m x m Gram matrix.
inline double spectral_norm(const Matrix& a, double tol = 1e-8, int max_iterations = 500) {
  if (a.cols() == 0 || a.rows() == 0) return 0.0;
  if (a.cols() == 1) return a.col(0).norm();
  const Matrix gram = a.transpose() * a;
  auto res = power_iteration([&gram](const Vector& v) -> Vector { return gram * v; },
                             gram.rows(), tol, max_iterations);
  return std::sqrt(std::max(0.0, res.eigenvalue));
}

}  // namespace apdpro
