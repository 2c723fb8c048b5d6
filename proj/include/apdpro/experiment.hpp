#pragma once

// Experiment driver: INI configs, reference solutions (with an on-disk cache
// beside the graph file), solver runs and CSV traces.

#include "apdpro/common.hpp"
#include "apdpro/metrics.hpp"
#include "apdpro/pagerank.hpp"
#include "apdpro/problem.hpp"
#include "apdpro/solvers.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <charconv>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace apdpro {

enum class InstanceKind { synthetic, ppr };
enum class ReferenceMode { none, oracle, long_run, file };

inline std::string_view to_string(ReferenceMode m) {
  switch (m) {
    case ReferenceMode::none: return "none";
    case ReferenceMode::oracle: return "oracle";
    case ReferenceMode::long_run: return "long-run";
    case ReferenceMode::file: return "file";
  }
  return "?";
}

inline ReferenceMode parse_reference_mode(std::string_view name) {
  if (name == "none") return ReferenceMode::none;
  if (name == "oracle") return ReferenceMode::oracle;
  if (name == "long-run" || name == "long_run") return ReferenceMode::long_run;
  if (name == "file") return ReferenceMode::file;
  throw InvalidArgument("unknown reference mode '" + std::string(name) + "'");
}

struct InstanceSpec {
  InstanceKind kind = InstanceKind::synthetic;
  // synthetic
  Vector center = Vector::Constant(1, 2.0);
  double level = 1.0;
  // ppr: `graph` is a file path or a generator "path:N" / "star:N"
  std::string graph;
  double alpha = 0.4;
  double b = -0.01;
  std::string teleport = "uniform";
  SubgradientRule r_rule = SubgradientRule::min_sqrt_degree;
};

struct ReferenceSpec {
  ReferenceMode mode = ReferenceMode::none;
  std::string path;  ///< file mode input
  double threshold = 1e-8;
  double kkt_tolerance = 1e-10;
  Index max_iters = 500000;
  bool cache = true;
};

struct OutputSpec {
  std::string csv;  ///< empty: no CSV
  Index stride = 1;
};

struct ExperimentConfig {
  InstanceSpec instance;
  SolverConfig solver;
  std::vector<Variant> compare_variants;  ///< solver list for `compare`
  ReferenceSpec reference;
  OutputSpec output;
};

namespace detail {

inline double parse_number(const std::string& key, const std::string& text) {
  double value = 0.0;
  const char* first = text.data();
  const char* last = first + text.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last) {
    throw ParseError("key '" + key + "': expected a number, got '" + text + "'");
  }
  return value;
}

inline Index parse_count(const std::string& key, const std::string& text) {
  long long value = 0;
  const char* first = text.data();
  const char* last = first + text.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || value < 0) {
    throw ParseError("key '" + key + "': expected a nonnegative integer, got '" + text + "'");
  }
  return static_cast<Index>(value);
}

inline bool parse_flag(const std::string& key, const std::string& text) {
  if (text == "true" || text == "1" || text == "yes" || text == "on") return true;
  if (text == "false" || text == "0" || text == "no" || text == "off") return false;
  throw ParseError("key '" + key + "': expected a boolean, got '" + text + "'");
}

inline std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, ',')) {
    const auto a = item.find_first_not_of(" \t");
    const auto b = item.find_last_not_of(" \t");
    if (a != std::string::npos) out.push_back(item.substr(a, b - a + 1));
  }
  return out;
}

inline std::string resolve_path(const std::filesystem::path& base, const std::string& p) {
  if (p.empty()) return p;
  const std::filesystem::path path(p);
  return path.is_absolute() ? p : (base / path).lexically_normal().string();
}

inline bool is_generated_graph(const std::string& graph) {
  return graph.rfind("path:", 0) == 0 || graph.rfind("star:", 0) == 0;
}

}  // namespace detail

/// Parses an INI experiment config. Relative paths resolve against base_dir.
inline ExperimentConfig parse_config(std::istream& in, const std::filesystem::path& base_dir = {}) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ParseError(std::string("config: ") + e.what());
  }

  static const std::map<std::string, std::set<std::string>> allowed = {
      {"instance", {"type", "center", "level", "graph", "alpha", "b", "teleport", "r_rule"}},
      {"solver",
       {"variant", "variants", "tau0", "sigma0", "rho0", "estimate", "max_iters",
        "max_epoch_iters", "max_epochs", "nu0", "delta", "restart_period",
        "msapd_forced_schedule", "msapd_stage_iters", "tolerance", "metric"}},
      {"reference", {"mode", "path", "threshold", "kkt_tolerance", "max_iters", "cache"}},
      {"output", {"csv", "stride"}},
  };

  ExperimentConfig cfg;
  bool saw_variant = false;
  for (const auto& [section, body] : tree) {
    const auto known = allowed.find(section);
    if (known == allowed.end()) {
      throw ParseError("config: unknown section [" + section + "]");
    }
    for (const auto& [key, node] : body) {
      if (!known->second.count(key)) {
        throw ParseError("config: unknown key '" + key + "' in [" + section + "]");
      }
      const std::string v = node.get_value<std::string>();
      const std::string qualified = section + "." + key;
      using detail::parse_count;
      using detail::parse_flag;
      using detail::parse_number;

      if (section == "instance") {
        InstanceSpec& s = cfg.instance;
        if (key == "type") {
          if (v == "synthetic") s.kind = InstanceKind::synthetic;
          else if (v == "ppr") s.kind = InstanceKind::ppr;
          else throw ParseError("config: unknown instance type '" + v + "'");
        } else if (key == "center") {
          const auto items = detail::split_list(v);
          if (items.empty()) throw ParseError("config: instance.center is empty");
          s.center.resize(static_cast<Index>(items.size()));
          for (std::size_t i = 0; i < items.size(); ++i) {
            s.center[static_cast<Index>(i)] = parse_number(qualified, items[i]);
          }
        } else if (key == "level") {
          s.level = parse_number(qualified, v);
        } else if (key == "graph") {
          s.graph = detail::is_generated_graph(v) ? v : detail::resolve_path(base_dir, v);
        } else if (key == "alpha") {
          s.alpha = parse_number(qualified, v);
        } else if (key == "b") {
          s.b = parse_number(qualified, v);
        } else if (key == "teleport") {
          s.teleport = v;
        } else if (key == "r_rule") {
          if (v == "min_degree") s.r_rule = SubgradientRule::min_degree;
          else if (v == "min_sqrt_degree") s.r_rule = SubgradientRule::min_sqrt_degree;
          else throw ParseError("config: unknown r_rule '" + v + "'");
        }
      } else if (section == "solver") {
        SolverConfig& s = cfg.solver;
        if (key == "variant") {
          s.variant = parse_variant(v);
          saw_variant = true;
        } else if (key == "variants") {
          for (const auto& item : detail::split_list(v)) cfg.compare_variants.push_back(parse_variant(item));
        } else if (key == "tau0") {
          s.tau0 = parse_number(qualified, v);
        } else if (key == "sigma0") {
          s.sigma0 = parse_number(qualified, v);
        } else if (key == "rho0") {
          s.rho0 = parse_number(qualified, v);
        } else if (key == "estimate") {
          s.estimate = parse_flag(qualified, v);
        } else if (key == "max_iters") {
          s.max_iters = parse_count(qualified, v);
        } else if (key == "max_epoch_iters") {
          s.max_epoch_iters = parse_count(qualified, v);
        } else if (key == "max_epochs") {
          s.max_epochs = parse_count(qualified, v);
        } else if (key == "nu0") {
          s.nu0 = parse_number(qualified, v);
        } else if (key == "delta") {
          s.delta = parse_number(qualified, v);
        } else if (key == "restart_period") {
          s.restart_period = parse_count(qualified, v);
        } else if (key == "msapd_forced_schedule") {
          s.msapd_forced_schedule = parse_flag(qualified, v);
        } else if (key == "msapd_stage_iters") {
          s.msapd_stage_iters = parse_count(qualified, v);
        } else if (key == "tolerance") {
          s.tolerance = parse_number(qualified, v);
        } else if (key == "metric") {
          s.metric = parse_metric_iterate(v);
        }
      } else if (section == "reference") {
        ReferenceSpec& s = cfg.reference;
        if (key == "mode") s.mode = parse_reference_mode(v);
        else if (key == "path") s.path = detail::resolve_path(base_dir, v);
        else if (key == "threshold") s.threshold = parse_number(qualified, v);
        else if (key == "kkt_tolerance") s.kkt_tolerance = parse_number(qualified, v);
        else if (key == "max_iters") s.max_iters = parse_count(qualified, v);
        else if (key == "cache") s.cache = parse_flag(qualified, v);
      } else if (section == "output") {
        if (key == "csv") cfg.output.csv = detail::resolve_path(base_dir, v);
        else if (key == "stride") cfg.output.stride = parse_count(qualified, v);
      }
    }
  }

  if (!saw_variant && !cfg.compare_variants.empty()) cfg.solver.variant = cfg.compare_variants.front();
  if (!(cfg.reference.threshold > 0.0)) throw InvalidArgument("config: threshold must be positive");
  if (cfg.output.stride < 1) throw InvalidArgument("config: stride must be at least 1");
  if (cfg.instance.kind == InstanceKind::ppr && cfg.instance.graph.empty()) {
    throw InvalidArgument("config: ppr instance needs instance.graph");
  }
  if (cfg.reference.mode == ReferenceMode::file && cfg.reference.path.empty()) {
    throw InvalidArgument("config: reference mode 'file' needs reference.path");
  }
  return cfg;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open config '" + path + "'");
  return parse_config(in, std::filesystem::path(path).parent_path());
}

/// A constructed instance. `oracle` is set for synthetic instances.
struct Instance {
  ConstrainedProblem problem;
  std::optional<SyntheticInstance> oracle;
  std::optional<PprInstance> ppr;
  std::string graph_file;     ///< set when the graph came from disk
  std::uint64_t content_hash = 0;
};

namespace detail {

/// FNV-1a, 64 bit.
class Fnv1a {
 public:
  void bytes(const void* data, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
      h_ ^= p[i];
      h_ *= 1099511628211ULL;
    }
  }
  void text(const std::string& s) { bytes(s.data(), s.size() + 1); }
  void number(double v) { bytes(&v, sizeof v); }
  std::uint64_t value() const { return h_; }

 private:
  std::uint64_t h_ = 1469598103934665603ULL;
};

inline Vector parse_teleport(const std::string& spec, Index n) {
  if (spec == "uniform") return Vector::Constant(n, 1.0 / static_cast<double>(n));
  if (spec.rfind("seed:", 0) == 0) {
    std::vector<Index> seeds;
    for (const auto& item : split_list(spec.substr(5))) seeds.push_back(parse_count("teleport", item));
    return seed_teleport(n, seeds);
  }
  throw InvalidArgument("teleport must be 'uniform' or 'seed:i,j,...', got '" + spec + "'");
}

inline Graph make_graph(const std::string& spec) {
  if (spec.rfind("path:", 0) == 0) return path_graph(parse_count("graph", spec.substr(5)));
  if (spec.rfind("star:", 0) == 0) return star_graph(parse_count("graph", spec.substr(5)));
  return load_graph(spec);
}

}  // namespace detail

inline Instance build_instance(const InstanceSpec& spec) {
  Instance out;
  detail::Fnv1a hash;
  if (spec.kind == InstanceKind::synthetic) {
    out.oracle = make_synthetic_instance(spec.center, spec.level);
    out.problem = out.oracle->problem;
    hash.text("synthetic");
    for (Index i = 0; i < spec.center.size(); ++i) hash.number(spec.center[i]);
    hash.number(spec.level);
  } else {
    const Graph graph = detail::make_graph(spec.graph);
    const Vector s = detail::parse_teleport(spec.teleport, graph.n);
    out.ppr = build_ppr_problem(graph, spec.alpha, spec.b, s, spec.r_rule);
    out.problem = out.ppr->problem;
    hash.text("ppr");
    if (detail::is_generated_graph(spec.graph)) {
      hash.text(spec.graph);
    } else {
      out.graph_file = spec.graph;
      std::ifstream in(spec.graph, std::ios::binary);
      const std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
      hash.text(content);
    }
    hash.number(spec.alpha);
    hash.number(spec.b);
    hash.text(spec.teleport);
    hash.number(spec.r_rule == SubgradientRule::min_degree ? 0.0 : 1.0);
  }
  out.content_hash = hash.value();
  return out;
}

struct ReferenceSolution {
  Vector x;
  Vector y;
  double f = 0.0;
  double kkt = 0.0;
  bool converged = false;
  bool from_cache = false;
  std::string note;
};

inline void write_reference(const std::string& path, const ReferenceSolution& ref) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write reference file '" + path + "'");
  char buf[64];
  auto put = [&](double v) {
    std::snprintf(buf, sizeof buf, " %.17g", v);
    out << buf;
  };
  out << "f";
  put(ref.f);
  out << "\nkkt";
  put(ref.kkt);
  out << "\nconverged " << (ref.converged ? 1 : 0) << "\nx";
  for (Index i = 0; i < ref.x.size(); ++i) put(ref.x[i]);
  out << "\ny";
  for (Index i = 0; i < ref.y.size(); ++i) put(ref.y[i]);
  out << "\n";
  if (!out) throw Error("failed writing reference file '" + path + "'");
}

inline ReferenceSolution read_reference(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open reference file '" + path + "'");
  ReferenceSolution ref;
  std::string line;
  auto read_vector = [](std::istringstream& fields) {
    std::vector<double> values;
    double v = 0.0;
    while (fields >> v) values.push_back(v);
    return Eigen::Map<Vector>(values.data(), static_cast<Index>(values.size())).eval();
  };
  while (std::getline(in, line)) {
    std::istringstream fields(line);
    std::string tag;
    if (!(fields >> tag)) continue;
    if (tag == "f") fields >> ref.f;
    else if (tag == "kkt") fields >> ref.kkt;
    else if (tag == "converged") fields >> ref.converged;
    else if (tag == "x") ref.x = read_vector(fields);
    else if (tag == "y") ref.y = read_vector(fields);
    else throw ParseError(path + ": unknown reference field '" + tag + "'");
  }
  if (ref.x.size() == 0) throw ParseError(path + ": reference has no x");
  return ref;
}

/// Where a long-run reference for this instance is cached, or "" if nowhere.
inline std::string reference_cache_path(const Instance& inst) {
  if (inst.graph_file.empty()) return {};
  char hex[17];
  std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(inst.content_hash));
  return inst.graph_file + ".ref-" + hex + ".txt";
}

/// rAPDPro run to the KKT tolerance; an unconverged run is returned with
/// converged = false rather than thrown.
inline ReferenceSolution long_run_reference(const ConstrainedProblem& problem,
                                            const ReferenceSpec& spec) {
  const ProblemConstants constants = derive_constants(problem);
  SolverConfig cfg;
  cfg.variant = Variant::rapdpro;
  cfg.max_iters = spec.max_iters;
  cfg.max_epochs = 200;
  cfg.tolerance = spec.kkt_tolerance;
  auto [x0, y0] = default_start(problem, constants);
  RunOptions options;
  options.record_trace = false;
  const RunResult run = rapdpro(problem, constants, cfg, x0, y0, options);

  ReferenceSolution ref;
  ref.x = run.x;
  ref.y = run.y;
  ref.f = problem.objective.value(ref.x);
  ref.kkt = kkt_residual(problem, ref.x, ref.y).max();
  ref.converged = ref.kkt <= spec.kkt_tolerance;
  if (!ref.converged) {
    ref.note = "reference unconverged: KKT residual " + std::to_string(ref.kkt) + " after " +
               std::to_string(run.trace.empty() ? cfg.max_iters : run.trace.back().iter) +
               " iterations";
  }
  return ref;
}

inline std::optional<ReferenceSolution> reference_solution(const Instance& inst,
                                                           const ReferenceSpec& spec) {
  switch (spec.mode) {
    case ReferenceMode::none: return std::nullopt;
    case ReferenceMode::oracle: {
      if (!inst.oracle) throw InvalidArgument("oracle reference needs a synthetic instance");
      ReferenceSolution ref;
      ref.x = inst.oracle->x_star;
      ref.y = inst.oracle->y_star;
      ref.f = inst.oracle->f_star;
      ref.kkt = kkt_residual(inst.problem, ref.x, ref.y).max();
      ref.converged = true;
      return ref;
    }
    case ReferenceMode::file: {
      ReferenceSolution ref = read_reference(spec.path);
      require_same_size(ref.x.size(), inst.problem.dimension(), "reference file x");
      return ref;
    }
    case ReferenceMode::long_run: {
      const std::string cache = spec.cache ? reference_cache_path(inst) : std::string();
      if (!cache.empty() && std::filesystem::exists(cache)) {
        ReferenceSolution ref = read_reference(cache);
        if (ref.x.size() == inst.problem.dimension() && ref.converged) {
          ref.from_cache = true;
          return ref;
        }
      }
      ReferenceSolution ref = long_run_reference(inst.problem, spec);
      if (!cache.empty() && ref.converged) write_reference(cache, ref);
      return ref;
    }
  }
  return std::nullopt;
}

inline const char* kCsvHeader =
    "iter,epoch,objective,rel_gap,feas_violation,rho,tau,sigma,active_set_acc,elapsed_s";

/// Writes every stride-th record (iter divisible by stride).
inline void write_csv(std::ostream& out, const std::vector<IterateRecord>& trace, Index stride = 1) {
  require(stride >= 1, "write_csv: stride must be at least 1");
  out << kCsvHeader << '\n';
  char buf[64];
  auto num = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
  };
  auto opt = [&](const std::optional<double>& v) { return v ? num(*v) : std::string(); };
  for (const IterateRecord& r : trace) {
    if (r.iter % stride != 0) continue;
    out << r.iter << ',' << r.epoch << ',' << num(r.objective) << ',' << opt(r.rel_gap) << ','
        << num(r.feas_violation) << ',' << num(r.rho) << ',' << num(r.tau) << ',' << num(r.sigma)
        << ',' << opt(r.active_set_acc) << ',' << num(r.elapsed_s) << '\n';
  }
}

inline void write_csv_file(const std::string& path, const std::vector<IterateRecord>& trace,
                           Index stride = 1) {
  const std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream out(path);
  if (!out) throw Error("cannot open CSV output '" + path + "'");
  write_csv(out, trace, stride);
  out.flush();
  if (!out) throw Error("failed writing CSV output '" + path + "'");
}

struct ExperimentResult {
  RunResult run;
  std::optional<ReferenceSolution> reference;  ///< as obtained, even if unconverged
  bool metrics_available = false;
  std::string csv_path;
};

/// Runs one solver on an already built instance.
inline ExperimentResult run_on_instance(const Instance& inst, const SolverConfig& solver,
                                        const std::optional<ReferenceSolution>& reference,
                                        double threshold) {
  ExperimentResult out;
  out.reference = reference;
  const ProblemConstants constants = derive_constants(inst.problem);
  auto [x0, y0] = default_start(inst.problem, constants);
  std::optional<MetricReference> metric_ref;
  if (reference && reference->converged) {
    metric_ref = MetricReference{reference->x, reference->f, threshold};
    out.metrics_available = true;
  }
  RunOptions options;
  options.reference = metric_ref ? &*metric_ref : nullptr;
  out.run = solve(inst.problem, constants, solver, x0, y0, options);
  return out;
}

inline ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  const Instance inst = build_instance(cfg.instance);
  const auto reference = reference_solution(inst, cfg.reference);
  ExperimentResult out = run_on_instance(inst, cfg.solver, reference, cfg.reference.threshold);
  if (!cfg.output.csv.empty()) {
    write_csv_file(cfg.output.csv, out.run.trace, cfg.output.stride);
    out.csv_path = cfg.output.csv;
  }
  return out;
}

/// "out/run.csv" -> "out/run_apd.csv".
inline std::string variant_csv_path(const std::string& base, Variant v) {
  const std::filesystem::path p(base);
  const std::string name = p.stem().string() + "_" + std::string(to_string(v)) +
                           (p.has_extension() ? p.extension().string() : std::string(".csv"));
  return (p.parent_path() / name).string();
}

/// Runs every variant of the solver list against one shared reference.
inline std::vector<std::pair<Variant, ExperimentResult>> compare(const ExperimentConfig& cfg) {
  const std::vector<Variant> variants =
      cfg.compare_variants.empty() ? std::vector<Variant>{cfg.solver.variant} : cfg.compare_variants;
  const Instance inst = build_instance(cfg.instance);
  const auto reference = reference_solution(inst, cfg.reference);
  std::vector<std::pair<Variant, ExperimentResult>> results;
  for (Variant v : variants) {
    SolverConfig solver = cfg.solver;
    solver.variant = v;
    ExperimentResult r = run_on_instance(inst, solver, reference, cfg.reference.threshold);
    if (!cfg.output.csv.empty()) {
      r.csv_path = variant_csv_path(cfg.output.csv, v);
      write_csv_file(r.csv_path, r.run.trace, cfg.output.stride);
    }
    results.emplace_back(v, std::move(r));
  }
  return results;
}

}  // namespace apdpro
