#pragma once

// Constrained-problem model: min f(x) s.t. g_i(x) <= 0 with f a block-separable
// weighted Euclidean norm and each g_i strongly convex.

#include "apdpro/common.hpp"
#include "apdpro/spectral.hpp"

#include <Eigen/IterativeLinearSolvers>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <vector>

namespace apdpro {

struct Block {
  Index start = 0;
  Index length = 1;
};

/// f(x) = sum_i p_i * ||x_(i)|| over a partition of the coordinates into blocks.
/// Blocks of length one give a weighted l1 norm.
class BlockNormObjective {
 public:
  BlockNormObjective() = default;

  BlockNormObjective(Index dimension, std::vector<Block> blocks, Vector weights)
      : dim_(dimension), blocks_(std::move(blocks)), weights_(std::move(weights)) {
    require(dim_ > 0, "BlockNormObjective: dimension must be positive");
    require_same_size(static_cast<Index>(blocks_.size()), weights_.size(),
                      "BlockNormObjective blocks/weights");
    std::vector<char> covered(static_cast<std::size_t>(dim_), 0);
    for (const Block& b : blocks_) {
      require(b.length > 0 && b.start >= 0 && b.start + b.length <= dim_,
              "BlockNormObjective: block out of range");
      for (Index j = b.start; j < b.start + b.length; ++j) {
        require(!covered[static_cast<std::size_t>(j)], "BlockNormObjective: overlapping blocks");
        covered[static_cast<std::size_t>(j)] = 1;
      }
    }
    require(std::all_of(covered.begin(), covered.end(), [](char c) { return c != 0; }),
            "BlockNormObjective: blocks do not cover every coordinate");
    require((weights_.array() >= 0.0).all(), "BlockNormObjective: weights must be nonnegative");
  }

  static BlockNormObjective weighted_l1(Vector weights) {
    const Index n = weights.size();
    std::vector<Block> blocks(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) blocks[static_cast<std::size_t>(i)] = {i, 1};
    return BlockNormObjective(n, std::move(blocks), std::move(weights));
  }

  static BlockNormObjective l1(Index n) { return weighted_l1(Vector::Ones(n)); }

  /// Equal-size groups of length `group` (n must be a multiple of it).
  static BlockNormObjective group_lasso(Index n, Index group, Vector weights) {
    require(group > 0 && n % group == 0, "group_lasso: n must be a multiple of the group size");
    std::vector<Block> blocks;
    for (Index s = 0; s < n; s += group) blocks.push_back({s, group});
    return BlockNormObjective(n, std::move(blocks), std::move(weights));
  }

  Index dimension() const { return dim_; }
  Index num_blocks() const { return static_cast<Index>(blocks_.size()); }
  const std::vector<Block>& blocks() const { return blocks_; }
  const Vector& weights() const { return weights_; }

  double value(const Vector& x) const {
    require_same_size(x.size(), dim_, "BlockNormObjective::value");
    double acc = 0.0;
    for (std::size_t i = 0; i < blocks_.size(); ++i) {
      acc += weights_[static_cast<Index>(i)] * x.segment(blocks_[i].start, blocks_[i].length).norm();
    }
    return acc;
  }

  /// min f over R^n; zero for nonnegative weights.
  double minimum() const { return 0.0; }

 private:
  Index dim_ = 0;
  std::vector<Block> blocks_;
  Vector weights_;
};

/// The constraint map G : R^n -> R^m together with its Jacobian.
/// jacobian(x) is n x m; column i is the gradient of g_i.
class ConstraintMap {
 public:
  virtual ~ConstraintMap() = default;

  virtual Index dimension() const = 0;
  virtual Index size() const = 0;
  virtual Vector values(const Vector& x) const = 0;
  virtual Matrix jacobian(const Vector& x) const = 0;

  virtual void evaluate(const Vector& x, Vector& values_out, Matrix& jacobian_out) const {
    values_out = values(x);
    jacobian_out = jacobian(x);
  }

  /// Unconstrained minimizer of g_i when it can be computed by the map itself.
  virtual std::optional<Vector> minimizer(Index /*i*/) const { return std::nullopt; }
};

/// g_i(x) = 1/2 x'Q_i x + c_i'x + d_i with Q_i symmetric positive definite.
struct QuadraticTerm {
  SparseMatrix q;
  Vector c;
  double d = 0.0;
};

class QuadraticConstraints final : public ConstraintMap {
 public:
  explicit QuadraticConstraints(std::vector<QuadraticTerm> terms) : terms_(std::move(terms)) {
    require(!terms_.empty(), "QuadraticConstraints: need at least one constraint");
    n_ = terms_.front().c.size();
    for (const auto& t : terms_) {
      require(t.q.rows() == n_ && t.q.cols() == n_, "QuadraticConstraints: Q has wrong shape");
      require_same_size(t.c.size(), n_, "QuadraticConstraints linear term");
    }
  }

  Index dimension() const override { return n_; }
  Index size() const override { return static_cast<Index>(terms_.size()); }
  const std::vector<QuadraticTerm>& terms() const { return terms_; }

  Vector values(const Vector& x) const override {
    Vector out(size());
    for (Index i = 0; i < size(); ++i) {
      const auto& t = terms_[static_cast<std::size_t>(i)];
      const Vector qx = t.q * x;
      out[i] = 0.5 * x.dot(qx) + t.c.dot(x) + t.d;
    }
    return out;
  }

  Matrix jacobian(const Vector& x) const override {
    Matrix jac(n_, size());
    for (Index i = 0; i < size(); ++i) {
      const auto& t = terms_[static_cast<std::size_t>(i)];
      jac.col(i) = t.q * x + t.c;
    }
    return jac;
  }

  void evaluate(const Vector& x, Vector& values_out, Matrix& jacobian_out) const override {
    values_out.resize(size());
    jacobian_out.resize(n_, size());
    for (Index i = 0; i < size(); ++i) {
      const auto& t = terms_[static_cast<std::size_t>(i)];
      const Vector qx = t.q * x;
      values_out[i] = 0.5 * x.dot(qx) + t.c.dot(x) + t.d;
      jacobian_out.col(i) = qx + t.c;
    }
  }

  /// Solves Q_i x = -c_i by conjugate gradients (relative tolerance 1e-12).
  std::optional<Vector> minimizer(Index i) const override {
    const auto& t = terms_[static_cast<std::size_t>(i)];
    Eigen::ConjugateGradient<SparseMatrix, Eigen::Lower | Eigen::Upper> cg;
    cg.setTolerance(1e-12);
    cg.setMaxIterations(std::max<Index>(10 * n_, 1000));
    cg.compute(t.q);
    Vector x = cg.solve(-t.c);
    if (cg.info() != Eigen::Success) {
      throw NumericalFailure("QuadraticConstraints: conjugate gradient did not converge");
    }
    return x;
  }

 private:
  std::vector<QuadraticTerm> terms_;
  Index n_ = 0;
};

/// Constraint map assembled from caller-supplied callables.
class FunctionConstraints final : public ConstraintMap {
 public:
  using ValuesFn = std::function<Vector(const Vector&)>;
  using JacobianFn = std::function<Matrix(const Vector&)>;

  FunctionConstraints(Index n, Index m, ValuesFn g, JacobianFn jac,
                      std::vector<Vector> minimizers = {})
      : n_(n), m_(m), g_(std::move(g)), jac_(std::move(jac)), minimizers_(std::move(minimizers)) {}

  Index dimension() const override { return n_; }
  Index size() const override { return m_; }
  Vector values(const Vector& x) const override { return g_(x); }
  Matrix jacobian(const Vector& x) const override { return jac_(x); }
  std::optional<Vector> minimizer(Index i) const override {
    if (static_cast<std::size_t>(i) < minimizers_.size()) return minimizers_[static_cast<std::size_t>(i)];
    return std::nullopt;
  }

 private:
  Index n_;
  Index m_;
  ValuesFn g_;
  JacobianFn jac_;
  std::vector<Vector> minimizers_;
};

struct ConstrainedProblem {
  BlockNormObjective objective;
  std::shared_ptr<const ConstraintMap> constraints;
  Vector mu;                     ///< per-constraint strong-convexity moduli
  double lip_jacobian = 0.0;     ///< L_X
  double lip_constraints = 0.0;  ///< L_G
  double subgradient_lb = 0.0;   ///< r
  Vector strict_point;           ///< x~ with G(x~) < 0

  Index dimension() const { return objective.dimension(); }
  Index num_constraints() const { return constraints ? constraints->size() : 0; }
  double mu_min() const { return mu.minCoeff(); }
  double mu_max() const { return mu.maxCoeff(); }

  Vector g(const Vector& x) const { return constraints->values(x); }
  Matrix jacobian(const Vector& x) const { return constraints->jacobian(x); }

  /// Checks the structural invariants. Strict feasibility of x~ is checked by
  /// dual_radius_bound, which is where it matters.
  void validate() const {
    require(constraints != nullptr, "ConstrainedProblem: missing constraint map");
    require_same_size(constraints->dimension(), dimension(), "ConstrainedProblem constraints");
    require_same_size(mu.size(), num_constraints(), "ConstrainedProblem mu");
    require_same_size(strict_point.size(), dimension(), "ConstrainedProblem strict point");
    require((mu.array() > 0.0).all(), "ConstrainedProblem: every mu_i must be positive");
    require(subgradient_lb > 0.0, "ConstrainedProblem: r must be positive");
    require(lip_jacobian > 0.0 && lip_constraints > 0.0,
            "ConstrainedProblem: Lipschitz constants must be positive");
  }
};

struct Ball {
  Vector center;
  double radius = 0.0;

  bool contains(const Vector& x, double slack = 0.0) const {
    return (x - center).norm() <= radius + slack;
  }
};

struct ProblemConstants {
  double c_bar = 0.0;       ///< dual l1 bound
  Ball ball;                ///< primal domain X
  double diam_primal = 0.0; ///< D_X
  double diam_dual = 0.0;   ///< D_Y
  double lip_coupled = 0.0; ///< L_XY = c_bar * L_X
  double mu_lb = 0.0;       ///< min_i mu_i
};

struct KktResidual {
  double stationarity = 0.0;
  double complementarity = 0.0;
  double primal_violation = 0.0;
  double dual_violation = 0.0;

  double max() const {
    return std::max({stationarity, complementarity, primal_violation, dual_violation});
  }
};

/// L(x, y) = f(x) + <y, G(x)>. y is not required to be nonnegative.
inline double eval_lagrangian(const ConstrainedProblem& problem, const Vector& x, const Vector& y) {
  require_same_size(x.size(), problem.dimension(), "eval_lagrangian x");
  require_same_size(y.size(), problem.num_constraints(), "eval_lagrangian y");
  return problem.objective.value(x) + y.dot(problem.g(x));
}

/// c_bar = (f(x~) - min f) / min_i(-g_i(x~)). Every dual optimum has ||y*||_1 <= c_bar.
inline double dual_radius_bound(const ConstrainedProblem& problem) {
  const Vector gx = problem.g(problem.strict_point);
  const double margin = (-gx).minCoeff();
  if (!(margin > 0.0)) {
    throw InfeasibleError("dual_radius_bound: strict point is not strictly feasible (max g_i = " +
                          std::to_string(gx.maxCoeff()) + ")");
  }
  const double gap = problem.objective.value(problem.strict_point) - problem.objective.minimum();
  return std::max(0.0, gap) / margin;
}

/// Ball X = B(x~, min_i 2 sqrt(-2 g_i(x_i*) / mu_i)) containing x* in its interior.
inline Ball feasible_ball(const ConstrainedProblem& problem, const std::vector<Vector>& minimizers) {
  require_same_size(static_cast<Index>(minimizers.size()), problem.num_constraints(),
                    "feasible_ball minimizers");
  double radius = std::numeric_limits<double>::infinity();
  for (Index i = 0; i < problem.num_constraints(); ++i) {
    const Vector& xi = minimizers[static_cast<std::size_t>(i)];
    require_same_size(xi.size(), problem.dimension(), "feasible_ball minimizer");
    const double gi = problem.g(xi)[i];
    if (!(gi < 0.0)) {
      throw InfeasibleError("feasible_ball: constraint " + std::to_string(i) +
                            " has no strictly feasible point (min g_i = " + std::to_string(gi) + ")");
    }
    radius = std::min(radius, 2.0 * std::sqrt(-2.0 * gi / problem.mu[i]));
  }
  return Ball{problem.strict_point, radius};
}

/// Same, with minimizers taken from the constraint map (CG for quadratics).
inline Ball feasible_ball(const ConstrainedProblem& problem) {
  std::vector<Vector> minimizers;
  for (Index i = 0; i < problem.num_constraints(); ++i) {
    auto xi = problem.constraints->minimizer(i);
    if (!xi) {
      throw InvalidArgument("feasible_ball: constraint " + std::to_string(i) +
                            " cannot supply its minimizer; pass minimizers explicitly");
    }
    minimizers.push_back(std::move(*xi));
  }
  return feasible_ball(problem, minimizers);
}

inline ProblemConstants derive_constants(const ConstrainedProblem& problem, const Ball& ball) {
  require(ball.radius > 0.0, "derive_constants: ball radius must be positive");
  ProblemConstants k;
  k.c_bar = dual_radius_bound(problem);
  k.ball = ball;
  k.diam_primal = 2.0 * ball.radius;
  // Diameter of {y >= 0, ||y||_1 <= c}: c for m = 1, sqrt(2) c between two vertices otherwise.
  k.diam_dual = problem.num_constraints() >= 2 ? std::sqrt(2.0) * k.c_bar : k.c_bar;
  k.lip_coupled = k.c_bar * problem.lip_jacobian;
  k.mu_lb = problem.mu_min();
  return k;
}

inline ProblemConstants derive_constants(const ConstrainedProblem& problem) {
  return derive_constants(problem, feasible_ball(problem));
}

/// Stationarity of the Lagrangian measured per block, plus complementarity and
/// primal/dual feasibility violations.
inline KktResidual kkt_residual(const ConstrainedProblem& problem, const Vector& x, const Vector& y) {
  require_same_size(x.size(), problem.dimension(), "kkt_residual x");
  require_same_size(y.size(), problem.num_constraints(), "kkt_residual y");
  Vector gx;
  Matrix jac;
  problem.constraints->evaluate(x, gx, jac);
  const Vector coupling = jac * y;

  KktResidual r;
  double stat_sq = 0.0;
  const auto& blocks = problem.objective.blocks();
  const Vector& p = problem.objective.weights();
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    const auto xb = x.segment(blocks[i].start, blocks[i].length);
    const auto cb = coupling.segment(blocks[i].start, blocks[i].length);
    const double pi = p[static_cast<Index>(i)];
    const double xn = xb.norm();
    double res = 0.0;
    if (xn > 0.0) {
      res = (pi * xb / xn + cb).norm();
    } else {
      res = std::max(0.0, cb.norm() - pi);
    }
    stat_sq += res * res;
  }
  r.stationarity = std::sqrt(stat_sq);
  r.complementarity = std::abs(y.dot(gx));
  r.primal_violation = gx.cwiseMax(0.0).norm();
  r.dual_violation = (-y).cwiseMax(0.0).norm();
  return r;
}

/// Assumption check: 0 minimizes f, so some constraint must be violated there.
/// Reported, not enforced.
inline bool origin_is_infeasible(const ConstrainedProblem& problem) {
  return (problem.g(Vector::Zero(problem.dimension())).array() > 0.0).any();
}

}  // namespace apdpro
