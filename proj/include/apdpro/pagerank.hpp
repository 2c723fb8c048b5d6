#pragma once

// Sparse personalized PageRank as a strongly convex constrained problem:
//
//   min ||D^{1/2} x||_1  s.t.  1/2 x'Qx - alpha <s, D^{-1/2} x> <= b,
//   Q = D^{-1/2} (D - (1-alpha)/2 (D + A)) D^{-1/2},
//
// plus the synthetic l1-ball instances with closed-form KKT points that the
// oracle tests use.

#include "apdpro/common.hpp"
#include "apdpro/problem.hpp"
#include "apdpro/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <memory>
#include <queue>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace apdpro {

/// Undirected simple graph with every node of degree >= 1.
struct Graph {
  Index n = 0;
  SparseMatrix adjacency;  ///< symmetric 0/1, no self-loops
  Vector degrees;

  Index num_edges() const { return adjacency.nonZeros() / 2; }

  Index connected_components() const {
    std::vector<char> seen(static_cast<std::size_t>(n), 0);
    Index count = 0;
    for (Index root = 0; root < n; ++root) {
      if (seen[static_cast<std::size_t>(root)]) continue;
      ++count;
      std::queue<Index> todo;
      todo.push(root);
      seen[static_cast<std::size_t>(root)] = 1;
      while (!todo.empty()) {
        const Index u = todo.front();
        todo.pop();
        for (SparseMatrix::InnerIterator it(adjacency, u); it; ++it) {
          const Index v = it.row();
          if (!seen[static_cast<std::size_t>(v)]) {
            seen[static_cast<std::size_t>(v)] = 1;
            todo.push(v);
          }
        }
      }
    }
    return count;
  }
};

/// Builds a graph from an undirected edge list. Duplicates and self-loops are
/// dropped; isolated nodes are rejected.
inline Graph graph_from_edges(Index n, const std::vector<std::pair<Index, Index>>& edges) {
  require(n > 0, "graph: node count must be positive");
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(2 * edges.size());
  for (const auto& [u, v] : edges) {
    require(u >= 0 && v >= 0 && u < n && v < n, "graph: node id out of range");
    if (u == v) continue;
    triplets.emplace_back(u, v, 1.0);
    triplets.emplace_back(v, u, 1.0);
  }
  Graph g;
  g.n = n;
  g.adjacency.resize(n, n);
  // Duplicates collapse to a single unit entry.
  g.adjacency.setFromTriplets(triplets.begin(), triplets.end(),
                              [](double, double) { return 1.0; });
  g.adjacency.makeCompressed();
  g.degrees = Vector::Zero(n);
  for (Index col = 0; col < n; ++col) {
    for (SparseMatrix::InnerIterator it(g.adjacency, col); it; ++it) g.degrees[col] += 1.0;
  }
  for (Index i = 0; i < n; ++i) {
    if (g.degrees[i] < 1.0) {
      throw InvalidArgument("graph: node " + std::to_string(i) + " is isolated");
    }
  }
  return g;
}

/// Edge-list text: one "u v" pair of 0-based ids per line; '%' / '#' lines and
/// blank lines are skipped; "# nodes N" fixes the node count.
inline Graph parse_edge_list(std::istream& in) {
  std::vector<std::pair<Index, Index>> edges;
  Index declared_nodes = -1;
  Index max_id = -1;
  std::string line;
  Index line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    if (line[first] == '%' || line[first] == '#') {
      std::istringstream directive(line.substr(first + 1));
      std::string word;
      long long count = 0;
      if (directive >> word && word == "nodes" && directive >> count) {
        if (count <= 0) {
          throw ParseError("line " + std::to_string(line_no) + ": node count must be positive");
        }
        declared_nodes = static_cast<Index>(count);
      }
      continue;
    }
    std::istringstream fields(line);
    long long u = 0;
    long long v = 0;
    std::string extra;
    if (!(fields >> u >> v) || (fields >> extra)) {
      throw ParseError("line " + std::to_string(line_no) + ": expected \"u v\", got \"" + line +
                       "\"");
    }
    if (u < 0 || v < 0) {
      throw ParseError("line " + std::to_string(line_no) + ": node ids must be nonnegative");
    }
    edges.emplace_back(static_cast<Index>(u), static_cast<Index>(v));
    max_id = std::max<Index>(max_id, std::max<Index>(static_cast<Index>(u), static_cast<Index>(v)));
  }
  const Index n = declared_nodes > 0 ? declared_nodes : max_id + 1;
  if (n <= 0) throw ParseError("edge list is empty");
  if (max_id >= n) {
    throw ParseError("node id " + std::to_string(max_id) + " exceeds declared node count " +
                     std::to_string(n));
  }
  return graph_from_edges(n, edges);
}

inline Graph load_graph(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open graph file '" + path + "'");
  try {
    return parse_edge_list(in);
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what());
  }
}

inline Graph path_graph(Index n) {
  std::vector<std::pair<Index, Index>> edges;
  for (Index i = 0; i + 1 < n; ++i) edges.emplace_back(i, i + 1);
  return graph_from_edges(n, edges);
}

/// Node 0 is the hub.
inline Graph star_graph(Index n) {
  std::vector<std::pair<Index, Index>> edges;
  for (Index i = 1; i < n; ++i) edges.emplace_back(0, i);
  return graph_from_edges(n, edges);
}

/// D^{-1/2} A D^{-1/2}.
inline SparseMatrix normalized_adjacency(const Graph& g) {
  const Vector dinv = g.degrees.cwiseSqrt().cwiseInverse();
  SparseMatrix out = dinv.asDiagonal() * g.adjacency * dinv.asDiagonal();
  out.makeCompressed();
  return out;
}

/// Q = I - (1-alpha)/2 (I + D^{-1/2} A D^{-1/2}).
inline SparseMatrix ppr_q_matrix(const Graph& g, double alpha) {
  SparseMatrix eye(g.n, g.n);
  eye.setIdentity();
  SparseMatrix q = eye - (0.5 * (1.0 - alpha)) * (eye + normalized_adjacency(g));
  q.makeCompressed();
  return q;
}

struct SpectralBounds {
  double lambda_min = 0.0;
  double lambda_max = 0.0;
};

/// Extreme eigenvalues of a symmetric positive definite matrix by power
/// iteration, rounded outward by 1e-8 relative.
inline SpectralBounds spectral_bounds(const SparseMatrix& q, double tol = 1e-10,
                                      int max_iterations = 100000) {
  require(q.rows() == q.cols() && q.rows() > 0, "spectral_bounds: matrix must be square");
  const Index n = q.rows();
  const auto top = power_iteration([&q](const Vector& v) -> Vector { return q * v; }, n, tol,
                                   max_iterations);
  if (!top.converged) throw NumericalFailure("spectral_bounds: lambda_max did not converge");
  const double lmax = top.eigenvalue;
  const auto shifted = power_iteration(
      [&q, lmax](const Vector& v) -> Vector { return lmax * v - q * v; }, n, tol, max_iterations);
  if (!shifted.converged) throw NumericalFailure("spectral_bounds: lambda_min did not converge");
  const double lmin = lmax - shifted.eigenvalue;
  if (!(lmin > 0.0)) throw InvalidArgument("spectral_bounds: matrix is not positive definite");
  return SpectralBounds{lmin * (1.0 - 1e-8), lmax * (1.0 + 1e-8)};
}

/// How the subgradient lower bound r is set for ||D^{1/2} x||_1. Every
/// subgradient at a nonzero x has a coordinate of size sqrt(d_i), so
/// min_sqrt_degree is always valid; min_degree overshoots once every degree
/// exceeds one, and the dual cut built from it can then exclude y*.
enum class SubgradientRule { min_sqrt_degree, min_degree };

struct PprInstance {
  ConstrainedProblem problem;
  SparseMatrix q;
  Vector teleport;
  Vector dinv_sqrt;
  double alpha = 0.0;
  double b = 0.0;
  SpectralBounds spectrum;
};

/// Uniform distribution over a set of seed nodes.
inline Vector seed_teleport(Index n, const std::vector<Index>& seeds) {
  require(!seeds.empty(), "teleport: need at least one seed node");
  Vector s = Vector::Zero(n);
  for (Index i : seeds) {
    require(i >= 0 && i < n, "teleport: seed node out of range");
    s[i] = 1.0;
  }
  return s / s.sum();
}

inline PprInstance build_ppr_problem(const Graph& graph, double alpha, double b,
                                     const Vector& teleport,
                                     SubgradientRule rule = SubgradientRule::min_sqrt_degree) {
  require(alpha > 0.0 && alpha < 1.0, "build_ppr_problem: alpha must lie in (0, 1)");
  require_same_size(teleport.size(), graph.n, "build_ppr_problem teleport");
  require((teleport.array() >= 0.0).all() && std::abs(teleport.sum() - 1.0) <= 1e-12,
          "build_ppr_problem: teleport vector must lie on the simplex");

  PprInstance inst;
  inst.alpha = alpha;
  inst.b = b;
  inst.teleport = teleport;
  inst.dinv_sqrt = graph.degrees.cwiseSqrt().cwiseInverse();
  inst.q = ppr_q_matrix(graph, alpha);
  inst.spectrum = spectral_bounds(inst.q);

  QuadraticTerm term{inst.q, -alpha * inst.dinv_sqrt.cwiseProduct(teleport), -b};
  auto constraint = std::make_shared<QuadraticConstraints>(std::vector<QuadraticTerm>{term});
  const Vector x_tilde = *constraint->minimizer(0);
  Vector gx;
  Matrix jac;
  constraint->evaluate(x_tilde, gx, jac);
  if (!(gx[0] < 0.0)) {
    throw InfeasibleError("build_ppr_problem: target level b = " + std::to_string(b) +
                          " is unattainable (min g = " + std::to_string(gx[0]) + ")");
  }

  ConstrainedProblem& p = inst.problem;
  p.objective = BlockNormObjective::weighted_l1(graph.degrees.cwiseSqrt());
  p.constraints = constraint;
  p.mu = Vector::Constant(1, inst.spectrum.lambda_min);
  p.lip_jacobian = inst.spectrum.lambda_max;
  p.subgradient_lb = rule == SubgradientRule::min_degree ? graph.degrees.minCoeff()
                                                         : std::sqrt(graph.degrees.minCoeff());
  p.strict_point = x_tilde;
  // ||grad g(x)|| <= ||grad g(x~)|| + ||Q|| ||x - x~|| on B(x~, R).
  const double radius = 2.0 * std::sqrt(-2.0 * gx[0] / p.mu[0]);
  p.lip_constraints = jac.col(0).norm() + inst.spectrum.lambda_max * radius;
  p.validate();
  return inst;
}

/// Instance min ||x||_1 s.t. 1/2 ||x - c||^2 - R0^2 <= 0 with its exact KKT pair.
struct SyntheticInstance {
  ConstrainedProblem problem;
  Vector x_star;
  Vector y_star;
  double f_star = 0.0;
};

inline SyntheticInstance make_synthetic_instance(const Vector& center, double level) {
  const Index n = center.size();
  require(n > 0 && level > 0.0, "make_synthetic_instance: need n > 0 and level > 0");
  const double r2 = level * level;
  const double g0 = 0.5 * center.squaredNorm() - r2;
  if (!(g0 > 0.0)) {
    throw InvalidArgument("make_synthetic_instance: origin is feasible (g(0) = " +
                          std::to_string(g0) + "), the problem would be trivial");
  }

  SparseMatrix eye(n, n);
  eye.setIdentity();
  QuadraticTerm term{eye, -center, 0.5 * center.squaredNorm() - r2};

  SyntheticInstance out;
  ConstrainedProblem& p = out.problem;
  p.objective = BlockNormObjective::l1(n);
  p.constraints = std::make_shared<QuadraticConstraints>(std::vector<QuadraticTerm>{term});
  p.mu = Vector::Ones(1);
  p.lip_jacobian = 1.0;
  p.subgradient_lb = 1.0;
  p.strict_point = center;
  // Ball radius is 2 sqrt(2) R0 around c and ||grad g(x)|| = ||x - c||.
  p.lip_constraints = 2.0 * std::sqrt(2.0) * level;

  // KKT: x(y) = soft(c, 1/y); find lambda = 1/y with 1/2 sum min(|c_i|, lambda)^2 = R0^2.
  auto phi = [&](double lambda) {
    double acc = 0.0;
    for (Index i = 0; i < n; ++i) {
      const double m = std::min(std::abs(center[i]), lambda);
      acc += m * m;
    }
    return 0.5 * acc - r2;
  };
  double lo = 0.0;
  double hi = center.cwiseAbs().maxCoeff();
  for (int it = 0; it < 200 && hi - lo > 1e-14 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (phi(mid) < 0.0 ? lo : hi) = mid;
  }
  const double lambda = 0.5 * (lo + hi);
  out.x_star.resize(n);
  for (Index i = 0; i < n; ++i) {
    const double c = center[i];
    out.x_star[i] = std::abs(c) > lambda ? c - std::copysign(lambda, c) : 0.0;
  }
  out.y_star = Vector::Constant(1, 1.0 / lambda);
  out.f_star = out.x_star.lpNorm<1>();
  return out;
}

/// The one-dimensional instance |x| s.t. 1/2 (x - 2)^2 - 1 <= 0,
/// with x* = 2 - sqrt(2) and y* = 1/sqrt(2).
inline SyntheticInstance canonical_instance() {
  return make_synthetic_instance(Vector::Constant(1, 2.0), 1.0);
}

}  // namespace apdpro
