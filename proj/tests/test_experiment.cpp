#include "apdpro/experiment.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

namespace apdpro {
namespace {

namespace fs = std::filesystem;

ExperimentConfig config_from(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in);
}

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("apdpro_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path);
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) lines.push_back(line);
  return lines;
}

std::string drop_last_field(const std::string& line) { return line.substr(0, line.rfind(',')); }

Vector vec(std::initializer_list<double> values) {
  Vector v(static_cast<Index>(values.size()));
  Index i = 0;
  for (double x : values) v[i++] = x;
  return v;
}

TEST(ActiveSetAccuracy, Examples) {
  const Vector ref = vec({0.0, 2.0, 0.0});
  EXPECT_DOUBLE_EQ(active_set_accuracy(vec({0.0, 1.0, 0.0}), ref, 1e-8), 1.0);
  EXPECT_DOUBLE_EQ(active_set_accuracy(vec({1e-9, 1.0, 0.0}), ref, 1e-8), 1.0);
  EXPECT_DOUBLE_EQ(active_set_accuracy(vec({0.5, 1.0, 0.0}), ref, 1e-8), 2.0 / 3.0);
}

TEST(ActiveSetAccuracy, CountsBlocksNotCoordinates) {
  const BlockNormObjective f(4, {{0, 2}, {2, 2}}, Vector::Ones(2));
  EXPECT_DOUBLE_EQ(active_set_accuracy(vec({1.0, 0.0, 0.0, 0.0}), vec({0.0, 3.0, 0.0, 0.0}), f, 1e-8),
                   1.0);
  EXPECT_DOUBLE_EQ(active_set_accuracy(vec({1.0, 0.0, 1.0, 0.0}), vec({0.0, 3.0, 0.0, 0.0}), f, 1e-8),
                   0.5);
  EXPECT_THROW(active_set_accuracy(vec({1.0}), vec({1.0}), 0.0), InvalidArgument);
}

TEST(ComputeMetrics, Examples) {
  const auto inst = canonical_instance();
  // f(x) = |x| = 1.1 against f* = 1.0; x = 1.1 is feasible (g = -0.595).
  const MetricReference ref{Vector::Constant(1, 1.0), 1.0, 1e-8};
  const IterateRecord rec = compute_metrics(inst.problem, Vector::Constant(1, 1.1), {}, &ref);
  EXPECT_NEAR(*rec.rel_gap, 0.1, 1e-15);
  EXPECT_EQ(rec.feas_violation, 0.0);
  EXPECT_EQ(*rec.active_set_acc, 1.0);

  const IterateRecord bare = compute_metrics(inst.problem, Vector::Zero(1), {}, nullptr);
  EXPECT_FALSE(bare.rel_gap.has_value());
  EXPECT_FALSE(bare.active_set_acc.has_value());
  EXPECT_DOUBLE_EQ(bare.feas_violation, 1.0);
}

TEST(Csv, AbsentMetricsAreEmptyFields) {
  IterateRecord r;
  r.iter = 3;
  r.objective = 0.5;
  std::ostringstream out;
  write_csv(out, {r});
  std::istringstream lines(out.str());
  std::string header;
  std::string row;
  std::getline(lines, header);
  std::getline(lines, row);
  EXPECT_EQ(header, "iter,epoch,objective,rel_gap,feas_violation,rho,tau,sigma,active_set_acc,elapsed_s");
  EXPECT_EQ(row, "3,0,0.5,,0,0,0,0,,0");
}

TEST(Csv, SeventeenSignificantDigitsAndStride) {
  std::vector<IterateRecord> trace(10);
  for (std::size_t i = 0; i < trace.size(); ++i) {
    trace[i].iter = static_cast<Index>(i + 1);
    trace[i].objective = 1.0 / 3.0;
  }
  std::ostringstream out;
  write_csv(out, trace, 5);
  const std::string text = out.str();
  EXPECT_NE(text.find("5,0,0.33333333333333331,"), std::string::npos);
  EXPECT_NE(text.find("10,0,"), std::string::npos);
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 3);
  EXPECT_THROW(write_csv(out, trace, 0), InvalidArgument);
}

TEST(Config, ParsesAllSections) {
  const ExperimentConfig cfg = config_from(
      "[instance]\ntype = synthetic\ncenter = 2, -3\nlevel = 1.5\n"
      "[solver]\nvariant = rapdpro\nmax_iters = 77\ntau0 = 0.1\nestimate = false\nmetric = ergodic\n"
      "[reference]\nmode = oracle\nthreshold = 1e-6\n"
      "[output]\nstride = 4\n");
  EXPECT_EQ(cfg.instance.kind, InstanceKind::synthetic);
  EXPECT_EQ(cfg.instance.center, vec({2.0, -3.0}));
  EXPECT_DOUBLE_EQ(cfg.instance.level, 1.5);
  EXPECT_EQ(cfg.solver.variant, Variant::rapdpro);
  EXPECT_EQ(cfg.solver.max_iters, 77);
  EXPECT_DOUBLE_EQ(*cfg.solver.tau0, 0.1);
  EXPECT_FALSE(cfg.solver.estimate);
  EXPECT_EQ(cfg.solver.metric, MetricIterate::ergodic);
  EXPECT_EQ(cfg.reference.mode, ReferenceMode::oracle);
  EXPECT_DOUBLE_EQ(cfg.reference.threshold, 1e-6);
  EXPECT_EQ(cfg.output.stride, 4);
}

TEST(Config, UnknownKeysAndSectionsAreErrors) {
  EXPECT_THROW(config_from("[solver]\nvariant = apdpro\nstep = 2\n"), ParseError);
  EXPECT_THROW(config_from("[plot]\nstyle = log\n"), ParseError);
  EXPECT_THROW(config_from("[solver]\nmax_iters = ten\n"), ParseError);
  EXPECT_THROW(config_from("[solver]\nvariant = pdhg\n"), InvalidArgument);
  EXPECT_THROW(config_from("[reference]\nthreshold = 0\n"), InvalidArgument);
  EXPECT_THROW(config_from("[instance]\ntype = ppr\n"), InvalidArgument);
}

TEST(Config, CompareListSetsDefaultVariant) {
  const ExperimentConfig cfg = config_from("[solver]\nvariants = apd, rapdpro, msapd\n");
  ASSERT_EQ(cfg.compare_variants.size(), 3u);
  EXPECT_EQ(cfg.solver.variant, Variant::apd);
  EXPECT_EQ(cfg.compare_variants[2], Variant::msapd);
}

TEST(Config, DatasetSettingsAccepted) {
  // Node counts and (b, alpha) of the benchmark graphs.
  struct Row {
    const char* name;
    double b;
    double alpha;
  };
  for (const Row& row : {Row{"bio-CE-HT", -0.04, 0.4}, Row{"bio-CE-LC", -0.05, 0.4},
                         Row{"econ-beaflw", -0.01, 0.995}, Row{"DD68", -0.005, 0.4},
                         Row{"DD242", -0.05, 0.4}, Row{"peking-1", -0.001, 0.4}}) {
    const fs::path file = fs::path(APDPRO_DATA_DIR) / "datasets" / (std::string(row.name) + ".ini");
    ASSERT_TRUE(fs::exists(file)) << file;
    const ExperimentConfig cfg = load_config(file.string());
    EXPECT_EQ(cfg.instance.kind, InstanceKind::ppr);
    EXPECT_DOUBLE_EQ(cfg.instance.b, row.b);
    EXPECT_DOUBLE_EQ(cfg.instance.alpha, row.alpha);
    EXPECT_EQ(cfg.reference.mode, ReferenceMode::long_run);
  }
}

TEST(Config, ShippedConfigsLoad) {
  for (const char* name : {"canonical.ini", "star20.ini", "compare.ini", "sample_graph.ini"}) {
    EXPECT_NO_THROW(load_config((fs::path(APDPRO_DATA_DIR) / name).string())) << name;
  }
}

TEST(Reference, OracleOnCanonicalInstance) {
  const Instance inst = build_instance(InstanceSpec{});
  ReferenceSpec spec;
  spec.mode = ReferenceMode::oracle;
  const auto ref = reference_solution(inst, spec);
  ASSERT_TRUE(ref.has_value());
  EXPECT_NEAR(ref->x[0], 2.0 - std::sqrt(2.0), 1e-14);
  EXPECT_NEAR(ref->y[0], 1.0 / std::sqrt(2.0), 1e-14);
  EXPECT_NEAR(ref->f, 2.0 - std::sqrt(2.0), 1e-14);
}

TEST(Reference, OracleModeNeedsSyntheticInstance) {
  InstanceSpec is;
  is.kind = InstanceKind::ppr;
  is.graph = "path:2";
  is.alpha = 0.5;
  const Instance inst = build_instance(is);
  ReferenceSpec spec;
  spec.mode = ReferenceMode::oracle;
  EXPECT_THROW(reference_solution(inst, spec), InvalidArgument);
}

TEST(Reference, LongRunOnTwoNodePathIsCertified) {
  InstanceSpec is;
  is.kind = InstanceKind::ppr;
  is.graph = "path:2";
  is.alpha = 0.5;
  is.b = -0.01;
  is.teleport = "seed:0";
  const Instance inst = build_instance(is);
  ReferenceSpec spec;
  spec.mode = ReferenceMode::long_run;
  const auto ref = reference_solution(inst, spec);
  ASSERT_TRUE(ref.has_value());
  EXPECT_TRUE(ref->converged);
  EXPECT_LE(kkt_residual(inst.problem, ref->x, ref->y).max(), 1e-10);
  EXPECT_TRUE(reference_cache_path(inst).empty());  // generated graphs are never cached
}

TEST(Reference, UnconvergedLongRunIsReportedNotThrown) {
  InstanceSpec is;
  is.kind = InstanceKind::ppr;
  is.graph = "star:20";
  is.b = -0.11;
  is.teleport = "seed:1";
  const Instance inst = build_instance(is);
  ReferenceSpec spec;
  spec.mode = ReferenceMode::long_run;
  spec.max_iters = 3;
  const auto ref = reference_solution(inst, spec);
  ASSERT_TRUE(ref.has_value());
  EXPECT_FALSE(ref->converged);
  EXPECT_FALSE(ref->note.empty());
  const ExperimentResult r = run_on_instance(inst, SolverConfig{}, ref, 1e-8);
  EXPECT_FALSE(r.metrics_available);
  EXPECT_FALSE(r.run.trace.back().rel_gap.has_value());
}

TEST(Reference, CacheRoundTripBesideGraphFile) {
  const fs::path dir = scratch_dir("cache");
  const fs::path graph = dir / "star.txt";
  {
    std::ofstream out(graph);
    for (int i = 1; i < 8; ++i) out << "0 " << i << "\n";
  }
  InstanceSpec is;
  is.kind = InstanceKind::ppr;
  is.graph = graph.string();
  is.b = -0.01;
  is.teleport = "seed:1";
  const Instance inst = build_instance(is);
  const std::string cache = reference_cache_path(inst);
  ASSERT_FALSE(cache.empty());
  EXPECT_EQ(fs::path(cache).parent_path(), dir);

  ReferenceSpec spec;
  spec.mode = ReferenceMode::long_run;
  const auto first = reference_solution(inst, spec);
  ASSERT_TRUE(first->converged);
  EXPECT_FALSE(first->from_cache);
  EXPECT_TRUE(fs::exists(cache));
  const auto second = reference_solution(inst, spec);
  EXPECT_TRUE(second->from_cache);
  EXPECT_EQ(second->x, first->x);
  EXPECT_EQ(second->f, first->f);

  // A different level hashes to a different cache file.
  is.b = -0.02;
  EXPECT_NE(reference_cache_path(build_instance(is)), cache);

  spec.mode = ReferenceMode::file;
  spec.path = cache;
  EXPECT_EQ(reference_solution(inst, spec)->x, first->x);
  fs::remove_all(dir);
}

// On a graph whose degrees all exceed one, the default r keeps every dual cut
// below mu ||y*||_1 and the run converges.
TEST(RunExperiment, DefaultSubgradientBoundIsSoundOnSampleGraph) {
  ExperimentConfig cfg = load_config((fs::path(APDPRO_DATA_DIR) / "sample_graph.ini").string());
  cfg.output.csv.clear();
  cfg.reference.cache = false;
  const ExperimentResult r = run_experiment(cfg);
  ASSERT_TRUE(r.metrics_available);
  const double ceiling = build_instance(cfg.instance).problem.mu[0] * r.reference->y.sum();
  EXPECT_LE(r.run.final_rho, ceiling);
  EXPECT_LE(*r.run.trace.back().rel_gap, 1e-8);
}

TEST(RunExperiment, CanonicalApdproEndToEnd) {
  const fs::path dir = scratch_dir("run");
  ExperimentConfig cfg;
  cfg.solver.max_iters = 2000;
  cfg.reference.mode = ReferenceMode::oracle;
  cfg.output.csv = (dir / "out" / "run.csv").string();
  const ExperimentResult r = run_experiment(cfg);
  const auto lines = read_lines(cfg.output.csv);
  ASSERT_EQ(lines.size(), 2001u);
  EXPECT_EQ(lines.front(), kCsvHeader);
  for (const auto& line : lines) EXPECT_EQ(std::count(line.begin(), line.end(), ','), 9);
  EXPECT_LE(*r.run.trace.back().rel_gap, 1e-6);
  fs::remove_all(dir);
}

TEST(RunExperiment, CsvIsDeterministicApartFromTiming) {
  const fs::path dir = scratch_dir("determinism");
  ExperimentConfig cfg;
  cfg.solver.variant = Variant::rapdpro;
  cfg.solver.max_iters = 500;
  cfg.reference.mode = ReferenceMode::oracle;
  cfg.output.csv = (dir / "a.csv").string();
  run_experiment(cfg);
  cfg.output.csv = (dir / "b.csv").string();
  run_experiment(cfg);
  const auto a = read_lines((dir / "a.csv").string());
  const auto b = read_lines((dir / "b.csv").string());
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(drop_last_field(a[i]), drop_last_field(b[i]));
  fs::remove_all(dir);
}

TEST(RunExperiment, ApdproBeatsApdToGap) {
  ExperimentConfig cfg;
  cfg.solver.max_iters = 20000;
  cfg.reference.mode = ReferenceMode::oracle;
  auto first_hit = [](const RunResult& run) {
    for (const auto& rec : run.trace) {
      if (*rec.rel_gap <= 1e-6) return rec.iter;
    }
    return kUnboundedIters;
  };
  const Index pro = first_hit(run_experiment(cfg).run);
  cfg.solver.variant = Variant::apd;
  const Index base = first_hit(run_experiment(cfg).run);
  EXPECT_LT(pro, base);
}

TEST(Compare, OneCsvPerVariant) {
  const fs::path dir = scratch_dir("compare");
  ExperimentConfig cfg;
  cfg.solver.max_iters = 200;
  cfg.compare_variants = {Variant::apdpro, Variant::apd, Variant::msapd};
  cfg.reference.mode = ReferenceMode::oracle;
  cfg.output.csv = (dir / "cmp.csv").string();
  const auto results = compare(cfg);
  ASSERT_EQ(results.size(), 3u);
  for (const auto& [v, r] : results) {
    EXPECT_EQ(r.csv_path, variant_csv_path(cfg.output.csv, v));
    EXPECT_TRUE(fs::exists(r.csv_path));
  }
  EXPECT_EQ(variant_csv_path("out/run.csv", Variant::apd), "out/run_apd.csv");
  fs::remove_all(dir);
}

TEST(RapdproTrace, SmoothedGapNeverJumps) {
  ExperimentConfig cfg;
  cfg.instance.center = vec({3.0, -2.0, 0.5, 1.0});
  cfg.instance.level = 1.5;
  cfg.solver.variant = Variant::rapdpro;
  cfg.solver.max_iters = 3000;
  cfg.reference.mode = ReferenceMode::oracle;
  const auto& trace = run_experiment(cfg).run.trace;
  double previous = -1.0;
  for (std::size_t start = 0; start + 50 <= trace.size(); start += 50) {
    double mean = 0.0;
    for (std::size_t i = start; i < start + 50; ++i) mean += *trace[i].rel_gap;
    mean /= 50.0;
    if (previous > 0.0) {
      EXPECT_LE(mean, 10.0 * previous) << "window at " << start;
    }
    previous = mean;
  }
}

TEST(RapdproTrace, ActiveSetStaysIdentified) {
  ExperimentConfig cfg;
  cfg.instance.center = vec({3.0, -2.0, 0.5, 1.0});
  cfg.instance.level = 1.5;
  cfg.solver.variant = Variant::rapdpro;
  cfg.solver.max_iters = 3000;
  cfg.reference.mode = ReferenceMode::oracle;
  const auto& trace = run_experiment(cfg).run.trace;
  bool reached = false;
  for (const auto& rec : trace) {
    if (reached) {
      EXPECT_EQ(*rec.active_set_acc, 1.0) << "iteration " << rec.iter;
    }
    reached = reached || *rec.active_set_acc == 1.0;
  }
  EXPECT_TRUE(reached);
}

}  // namespace
}  // namespace apdpro
