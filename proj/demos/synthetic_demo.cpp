// Runs every solver on a small synthetic l1 instance with a known optimum and
// prints the distance to it after a fixed budget.

#include "apdpro/pagerank.hpp"
#include "apdpro/solvers.hpp"

#include <cstdio>

int main() {
  using namespace apdpro;
  const Vector center = (Vector(5) << 3.0, -2.0, 0.5, 1.0, -0.2).finished();
  const SyntheticInstance inst = make_synthetic_instance(center, 1.5);
  const ProblemConstants c = derive_constants(inst.problem);
  const auto [x0, y0] = default_start(inst.problem, c);

  std::printf("x* =");
  for (Index i = 0; i < inst.x_star.size(); ++i) std::printf(" %.6f", inst.x_star[i]);
  std::printf("   f* = %.10f\n\n", inst.f_star);
  std::printf("%-12s %12s %12s %8s\n", "solver", "|x - x*|", "rel gap", "rho");

  for (Variant v : {Variant::apdpro, Variant::rapdpro, Variant::msapd, Variant::apd}) {
    SolverConfig cfg;
    cfg.variant = v;
    cfg.max_iters = 3000;
    cfg.max_epochs = 100;
    RunOptions opts;
    opts.record_trace = false;
    const RunResult r = solve(inst.problem, c, cfg, x0, y0, opts);
    const Vector& x = r.solution();
    std::printf("%-12s %12.3e %12.3e %8.4f\n", std::string(to_string(v)).c_str(),
                (x - inst.x_star).norm(), relative_gap(inst.problem.objective.value(x), inst.f_star),
                r.final_rho);
  }
  return 0;
}
