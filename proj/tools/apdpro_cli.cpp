// Command-line driver: run, compare, reference, selftest.

#include "CLI11.hpp"
#include "acceptance/criteria.hpp"
#include "apdpro/experiment.hpp"

#include <cstdio>
#include <iostream>

namespace {

using namespace apdpro;

void print_run(const std::string& label, const ExperimentResult& r) {
  const RunResult& run = r.run;
  std::printf("%-12s iterations=%zu epochs=%lld termination=%s objective=%.12g", label.c_str(),
              run.trace.size(), static_cast<long long>(run.epochs_executed),
              std::string(to_string(run.termination)).c_str(),
              run.trace.empty() ? 0.0 : run.trace.back().objective);
  if (!run.trace.empty() && run.trace.back().rel_gap) {
    std::printf(" rel_gap=%.3e active_set_acc=%.4f", *run.trace.back().rel_gap,
                *run.trace.back().active_set_acc);
  }
  if (!r.csv_path.empty()) std::printf(" csv=%s", r.csv_path.c_str());
  std::printf("\n");
}

void print_reference(const std::optional<ReferenceSolution>& ref) {
  if (!ref) {
    std::printf("reference: none\n");
    return;
  }
  std::printf("reference: f=%.17g kkt=%.3e converged=%s%s\n", ref->f, ref->kkt,
              ref->converged ? "yes" : "no", ref->from_cache ? " (cached)" : "");
  if (!ref->note.empty()) std::printf("  %s; metrics unavailable\n", ref->note.c_str());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Primal-dual solvers for sparse problems with strongly convex constraints"};
  app.require_subcommand(1);

  std::string config_path;
  std::string csv_override;

  auto* run = app.add_subcommand("run", "Run one experiment");
  run->add_option("--config", config_path, "Experiment config (INI)")->required()->check(CLI::ExistingFile);
  run->add_option("--csv", csv_override, "Override [output] csv");

  auto* cmp = app.add_subcommand("compare", "Run every solver in [solver] variants");
  cmp->add_option("--config", config_path, "Experiment config (INI)")->required()->check(CLI::ExistingFile);
  cmp->add_option("--csv", csv_override, "Override [output] csv (base name)");

  auto* ref = app.add_subcommand("reference", "Compute and cache the reference solution only");
  ref->add_option("--config", config_path, "Experiment config (INI)")->required()->check(CLI::ExistingFile);

  app.add_subcommand("selftest", "Run the acceptance criteria");

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand("selftest")) {
      return acceptance::run_all(std::cout) == 0 ? 0 : 1;
    }
    ExperimentConfig cfg = load_config(config_path);
    if (!csv_override.empty()) cfg.output.csv = csv_override;

    if (*run) {
      const ExperimentResult r = run_experiment(cfg);
      print_reference(r.reference);
      print_run(std::string(to_string(cfg.solver.variant)), r);
    } else if (*cmp) {
      const auto results = compare(cfg);
      if (!results.empty()) print_reference(results.front().second.reference);
      for (const auto& [variant, r] : results) print_run(std::string(to_string(variant)), r);
    } else if (*ref) {
      if (cfg.reference.mode == ReferenceMode::none) {
        std::fprintf(stderr, "error: [reference] mode is 'none'\n");
        return 2;
      }
      const Instance inst = build_instance(cfg.instance);
      print_reference(reference_solution(inst, cfg.reference));
      const std::string cache = reference_cache_path(inst);
      if (cfg.reference.mode == ReferenceMode::long_run && cfg.reference.cache && !cache.empty()) {
        std::printf("cache: %s\n", cache.c_str());
      }
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
