#pragma once

#include "apdpro/common.hpp"
#include "apdpro/problem.hpp"

#include <cmath>
#include <optional>

namespace apdpro {

/// One row of a convergence trace.
struct IterateRecord {
  Index iter = 0;
  Index epoch = 0;
  double objective = 0.0;
  std::optional<double> rel_gap;
  double feas_violation = 0.0;
  double rho = 0.0;
  double tau = 0.0;
  double sigma = 0.0;
  std::optional<double> active_set_acc;
  double elapsed_s = 0.0;
};

/// Reference optimum used for gap and support-recovery metrics.
struct MetricReference {
  Vector x;
  double f = 0.0;
  double threshold = 1e-8;
};

/// Fraction of blocks on which x and x_ref agree about being zero, after
/// zeroing every block whose norm is below the threshold.
inline double active_set_accuracy(const Vector& x, const Vector& x_ref,
                                  const BlockNormObjective& objective, double threshold) {
  require(threshold > 0.0, "active_set_accuracy: threshold must be positive");
  require_same_size(x.size(), objective.dimension(), "active_set_accuracy x");
  require_same_size(x_ref.size(), objective.dimension(), "active_set_accuracy x_ref");
  Index agree = 0;
  for (const Block& b : objective.blocks()) {
    const bool zero = x.segment(b.start, b.length).norm() < threshold;
    const bool zero_ref = x_ref.segment(b.start, b.length).norm() < threshold;
    if (zero == zero_ref) ++agree;
  }
  return static_cast<double>(agree) / static_cast<double>(objective.num_blocks());
}

/// Coordinate-wise version (every coordinate its own block).
inline double active_set_accuracy(const Vector& x, const Vector& x_ref, double threshold) {
  return active_set_accuracy(x, x_ref, BlockNormObjective::l1(x.size()), threshold);
}

inline double relative_gap(double f, double f_ref) {
  const double denom = std::abs(f_ref);
  return denom > 0.0 ? std::abs(f - f_ref) / denom : std::abs(f - f_ref);
}

struct RecordInputs {
  Index iter = 0;
  Index epoch = 0;
  double rho = 0.0;
  double tau = 0.0;
  double sigma = 0.0;
  double elapsed_s = 0.0;
};

/// Fills the metric fields of a record at the metric iterate x. `g_at_x` may
/// carry G(x) when the caller already has it.
inline IterateRecord compute_metrics(const ConstrainedProblem& problem, const Vector& x,
                                     const RecordInputs& in, const MetricReference* reference,
                                     const Vector* g_at_x = nullptr) {
  IterateRecord rec;
  rec.iter = in.iter;
  rec.epoch = in.epoch;
  rec.rho = in.rho;
  rec.tau = in.tau;
  rec.sigma = in.sigma;
  rec.elapsed_s = in.elapsed_s;
  rec.objective = problem.objective.value(x);
  rec.feas_violation = g_at_x ? g_at_x->cwiseMax(0.0).norm() : problem.g(x).cwiseMax(0.0).norm();
  if (reference != nullptr) {
    rec.rel_gap = relative_gap(rec.objective, reference->f);
    rec.active_set_acc =
        active_set_accuracy(x, reference->x, problem.objective, reference->threshold);
  }
  return rec;
}

}  // namespace apdpro
